#include "rgg/errors.hpp"
#include "rgg/train_json.hpp"
#include "rgg/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace rgg;

namespace {

TrainConfig small_config()
{
   TrainConfig c;
   c.hidden_dim = 16;
   c.feature_dim = 6;
   c.batch = 32;
   c.steps = 40;
   c.projections = 24;
   c.warmup_steps = 5;
   c.log_every = 10;
   c.eval_samples = 128;
   return c;
}

double total_loss(const EncoderModel& m, const SampleMatrix& x, const SampleMatrix& xp, const SampleMatrix& y,
                  const ProjectionSet& proj)
{
   return rdmreg_loss(forward(m, x), forward(m, xp), y, proj, 25.0, 125.0).total;
}

// Plain central differences over every coordinate, written independently of
// check_gradient.
void expect_matches_central_differences(EncoderModel model, const SampleMatrix& x, const SampleMatrix& xp,
                                        const SampleMatrix& y, const ProjectionSet& proj)
{
   const BackwardResult br = backward(model, x, xp, y, proj, 25.0, 125.0);
   const double h = 1e-6;
   int compared = 0;
   for (std::size_t l = 0; l < model.layers.size(); ++l) {
      for (int which = 0; which < 2; ++which) {
         auto& layer = model.layers[l];
         double* theta = which == 0 ? layer.weight.data() : layer.bias.data();
         const double* g = which == 0 ? br.grad.layers[l].weight.data() : br.grad.layers[l].bias.data();
         const Eigen::Index n = which == 0 ? layer.weight.size() : layer.bias.size();
         for (Eigen::Index k = 0; k < n; ++k) {
            const double saved = theta[k];
            theta[k] = saved + h;
            const double up = total_loss(model, x, xp, y, proj);
            theta[k] = saved - h;
            const double down = total_loss(model, x, xp, y, proj);
            theta[k] = saved;
            const double numeric = (up - down) / (2.0 * h);
            EXPECT_NEAR(g[k], numeric, 1e-5 * std::max(1.0, std::abs(numeric)))
               << "layer " << l << (which == 0 ? " weight " : " bias ") << k;
            ++compared;
         }
      }
   }
   EXPECT_EQ(static_cast<std::size_t>(compared), model.parameter_count());
}

} // namespace

TEST(Views, NoiselessViewsCoincide)
{
   const auto v = generate_views(50, 8, 0.0, 3);
   EXPECT_EQ(v.x, v.xprime);
   EXPECT_EQ(v.x.rows(), 50);
   EXPECT_EQ(v.x.cols(), 8);
   EXPECT_THROW(generate_views(0, 8, 0.1, 3), DomainError);
   EXPECT_THROW(generate_views(5, 8, -0.1, 3), DomainError);
}

TEST(Views, PairDistanceMatchesNoiseAlgebra)
{
   const double s = 0.3;
   const auto v = generate_views(40'000, 8, s, 4);
   const Eigen::VectorXd d2 = (v.x - v.xprime).rowwise().squaredNorm();
   const double expected = 2.0 * 8.0 * s * s;
   // each squared norm is 2 s^2 chi^2_8, variance (2 s^2)^2 * 16
   const double se = 2.0 * s * s * 4.0 / std::sqrt(40'000.0);
   EXPECT_NEAR(d2.mean(), expected, 4.0 * se);
}

TEST(Views, DatasetFixedBySeedAndViewsBySeed)
{
   const auto a = make_dataset(8, 4, 11);
   const auto b = make_dataset(8, 4, 11);
   const auto c = make_dataset(8, 4, 12);
   EXPECT_EQ(a.centers, b.centers);
   EXPECT_NE(a.centers, c.centers);
   EXPECT_EQ(generate_views(20, 8, 0.1, 5).x, generate_views(20, 8, 0.1, 5).x);
   EXPECT_NE(generate_views(20, 8, 0.1, 5).x, generate_views(20, 8, 0.1, 6).x);
   // noise-free views land within a few spreads of one of the four default centers
   const auto centers = make_dataset(8, 4, default_dataset_seed).centers;
   const auto v = generate_views(200, 8, 0.0, 7);
   for (Eigen::Index i = 0; i < v.x.rows(); ++i) {
      const double nearest = (centers.rowwise() - v.x.row(i)).rowwise().norm().minCoeff();
      EXPECT_LT(nearest, 0.5 * 8.0);
   }
}

TEST(Forward, ZeroAndSaturatedModels)
{
   Rng rng(1);
   EncoderModel m = init_encoder(4, 0, 3, true, rng);
   const auto x = generate_views(30, 4, 0.1, 2).x;
   m.layers[0].weight.setZero();
   EXPECT_TRUE((forward(m, x).array() == 0.0).all());

   EncoderModel id = init_encoder(3, 0, 3, true, rng);
   id.layers[0].weight.setIdentity();
   id.layers[0].bias.setConstant(-1e6);
   EXPECT_TRUE((forward(id, generate_views(10, 3, 0.1, 2).x).array() == 0.0).all());

   EXPECT_THROW(forward(m, SampleMatrix::Ones(2, 5)), ShapeMismatch);
}

TEST(Forward, DefaultInitGivesExactZeros)
{
   Rng rng(2);
   const EncoderModel m = init_encoder(8, 64, 16, true, rng);
   const auto z = forward(m, generate_views(100, 8, 0.1, 3).x);
   EXPECT_GE(z.size(), 1000);
   EXPECT_TRUE((z.array() >= 0.0).all());
   EXPECT_GT((z.array() == 0.0).count(), 0);

   EncoderModel dense = m;
   dense.output_rectified = false;
   EXPECT_TRUE((forward(dense, generate_views(100, 8, 0.1, 3).x).array() < 0.0).any());
}

TEST(Backward, MatchesCentralDifferencesEverywhere)
{
   Rng rng(3);
   for (bool hidden_rectified : {true, false}) {
      const EncoderModel m = init_encoder(3, 5, 4, hidden_rectified, rng);
      const auto v = generate_views(12, 3, 0.2, rng.split());
      const auto y = sample_rgn({1.0, 0.0, sigma_gn(1.0)}, 12, 4, rng);
      const auto proj = sample_sphere_projections(7, 4, rng);
      expect_matches_central_differences(m, v.x, v.xprime, y, proj);

      EncoderModel dense = m;
      dense.output_rectified = false;
      expect_matches_central_differences(dense, v.x, v.xprime, sample_gn({2.0, 0.0, 1.0}, 12, 4, rng), proj);
   }
}

TEST(Backward, CheckerPassesAtDefaultScale)
{
   Rng rng(4);
   const EncoderModel m = init_encoder(8, 64, 16, true, rng);
   const auto v = generate_views(256, 8, 0.1, 5);
   const auto y = sample_rgn({1.0, 0.0, sigma_gn(1.0)}, 256, 16, rng);
   const auto proj = sample_sphere_projections(512, 16, rng);
   const auto check = check_gradient(m, v.x, v.xprime, y, proj, 25.0, 125.0, 100, 1e-6, rng);
   EXPECT_EQ(check.checked, 100u);
   EXPECT_LE(check.checked + check.skipped + check.negligible, 2000u);
   EXPECT_LE(check.max_rel_error, 1e-5);
}

TEST(Backward, IdenticalBranchesHaveNoInvarianceGradient)
{
   Rng rng(5);
   const EncoderModel m = init_encoder(4, 8, 5, true, rng);
   const auto x = generate_views(20, 4, 0.1, 6).x;
   const auto y = sample_rgn({1.0, 0.0, 1.0}, 20, 5, rng);
   const auto proj = sample_sphere_projections(9, 5, rng);
   const auto with_sim = backward(m, x, x, y, proj, 25.0, 125.0);
   const auto without = backward(m, x, x, y, proj, 0.0, 125.0);
   EXPECT_EQ(with_sim.loss.invariance, 0.0);
   for (std::size_t l = 0; l < m.layers.size(); ++l) {
      EXPECT_EQ(with_sim.grad.layers[l].weight, without.grad.layers[l].weight);
      EXPECT_EQ(with_sim.grad.layers[l].bias, without.grad.layers[l].bias);
   }
}

TEST(Backward, SeededTargetIsDeterministic)
{
   Rng rng(6);
   const EncoderModel m = init_encoder(4, 8, 5, true, rng);
   const auto v = generate_views(20, 4, 0.1, 7);
   const auto proj = sample_sphere_projections(9, 5, rng);
   const RGGParams target{1.0, 0.0, 1.0};
   const auto a = backward(m, v.x, v.xprime, target, proj, 25.0, 125.0, 99);
   const auto b = backward(m, v.x, v.xprime, target, proj, 25.0, 125.0, 99);
   EXPECT_EQ(a.loss.total, b.loss.total);
   EXPECT_EQ(a.grad.layers[0].weight, b.grad.layers[0].weight);
   EXPECT_EQ(a.loss.total, rdmreg_loss(forward(m, v.x), forward(m, v.xprime), target, proj, 25.0, 125.0, 99).total);
}

TEST(Schedule, WarmupThenCosine)
{
   TrainConfig c;
   c.learning_rate = 0.2;
   c.steps = 1100;
   c.warmup_steps = 100;
   EXPECT_DOUBLE_EQ(learning_rate_at(c, 0), 0.002);
   EXPECT_DOUBLE_EQ(learning_rate_at(c, 99), 0.2);
   EXPECT_DOUBLE_EQ(learning_rate_at(c, 100), 0.2);
   EXPECT_NEAR(learning_rate_at(c, 600), 0.1, 1e-15);
   EXPECT_NEAR(learning_rate_at(c, 1099), 0.1 * (1.0 + std::cos(std::numbers::pi * 999.0 / 1000.0)), 1e-15);
}

TEST(Train, DefaultTargetIsRectifiedLaplace)
{
   const TrainConfig c;
   EXPECT_EQ(c.target.sigma, sigma_gn(1.0));
   EXPECT_EQ(c.target.p, 1.0);
   EXPECT_EQ(c.target.mu, 0.0);
}

TEST(Train, TraceLayoutAndDeterminism)
{
   const TrainConfig c = small_config();
   const auto a = train(c);
   const auto b = train(c);
   ASSERT_EQ(a.trace.records.size(), 5u);
   for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
      EXPECT_EQ(a.trace.records[i].step, 10 * i);
      EXPECT_EQ(a.trace.records[i].loss.total, b.trace.records[i].loss.total);
      EXPECT_EQ(a.trace.records[i].sliced_stat, b.trace.records[i].sliced_stat);
   }
   EXPECT_EQ(a.model.layers[1].weight, b.model.layers[1].weight);

   TrainConfig odd = c;
   odd.steps = 25;
   const auto r = train(odd);
   ASSERT_EQ(r.trace.records.size(), 4u);
   EXPECT_EQ(r.trace.records.back().step, 25u);
}

TEST(Train, LossFallsOnSmallProblem)
{
   TrainConfig c = small_config();
   c.steps = 200;
   c.log_every = 200;
   const auto r = train(c);
   EXPECT_LT(r.trace.records.back().loss.total, 0.5 * r.trace.records.front().loss.total);
   EXPECT_LT(r.trace.records.back().sliced_stat, r.trace.records.front().sliced_stat);
}

TEST(Train, InvarianceAloneCollapses)
{
   TrainConfig c = small_config();
   c.steps = 300;
   c.log_every = 300;
   c.lambda_dist = 0.0;
   const auto r = train(c);
   EXPECT_LT(r.trace.records.back().feature_variance.maxCoeff(), 0.01);
   EXPECT_LT(r.trace.records.back().loss.invariance, 1e-3);
}

TEST(Train, GradientCheckRecordedWhenAsked)
{
   TrainConfig c = small_config();
   c.steps = 10;
   c.log_every = 1;
   c.gradient_check_coordinates = 30;
   const auto r = train(c);
   ASSERT_EQ(r.trace.records.size(), 11u);
   for (const auto& rec : r.trace.records) {
      ASSERT_TRUE(rec.gradient_check.has_value());
      EXPECT_LE(rec.gradient_check->max_rel_error, 1e-5);
   }
}

TEST(Train, DivergenceReportsStep)
{
   TrainConfig c = small_config();
   c.target_kind = TargetKind::dense;
   c.learning_rate = 1e12;
   c.grad_clip = 0.0;
   c.warmup_steps = 0;
   try {
      train(c);
      FAIL() << "expected divergence";
   } catch (const Divergence& e) {
      EXPECT_LT(e.step(), c.steps);
   }
}

TEST(Train, ConfigValidation)
{
   TrainConfig c = small_config();
   c.batch = 1;
   EXPECT_THROW(train(c), DomainError);
   c = small_config();
   c.momentum = 1.0;
   EXPECT_THROW(c.validate(), DomainError);
   c = small_config();
   c.target.p = -1.0;
   EXPECT_THROW(c.validate(), DomainError);
   c = small_config();
   c.learning_rate = 0.0;
   EXPECT_THROW(c.validate(), DomainError);
}

TEST(Train, PolicyComparisonSharesEverythingButPolicy)
{
   TrainConfig c = small_config();
   c.steps = 20;
   const auto cmp = compare_projection_policies(c);
   ASSERT_EQ(cmp.random.records.size(), cmp.eigen.records.size());
   // the step-0 evaluation happens before any update
   EXPECT_EQ(cmp.random.records[0].vcreg.covariance_loss, cmp.eigen.records[0].vcreg.covariance_loss);
   EXPECT_NE(cmp.random.records.back().loss.total, cmp.eigen.records.back().loss.total);
   c.policy = ProjectionPolicy::random_plus_bottom_eig;
   EXPECT_EQ(train(c).trace.records.back().loss.total, cmp.eigen.records.back().loss.total);
}

TEST(ModelCsv, RoundTripIsExact)
{
   Rng rng(7);
   EncoderModel m = init_encoder(3, 4, 2, false, rng);
   m.layers[1].bias << 0.1, -1.0 / 3.0;
   m.output_rectified = false;
   std::stringstream ss;
   save_model(ss, m);
   const EncoderModel back = load_model(ss);
   EXPECT_FALSE(back.hidden_rectified);
   EXPECT_FALSE(back.output_rectified);
   ASSERT_EQ(back.layers.size(), 2u);
   for (std::size_t l = 0; l < 2; ++l) {
      EXPECT_EQ(back.layers[l].weight, m.layers[l].weight);
      EXPECT_EQ(back.layers[l].bias, m.layers[l].bias);
   }
}

TEST(ModelCsv, MalformedInputReportsLine)
{
   std::stringstream bad("tensor,rows,cols,values\nrectified,1,2,1,1\nlayer0.weight,2,2,1,2,3\n");
   try {
      load_model(bad);
      FAIL() << "expected ParseError";
   } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 3u);
   }
   std::stringstream no_header("rectified,1,2,1,1\n");
   EXPECT_THROW(load_model(no_header), ParseError);
   std::stringstream chain(
      "tensor,rows,cols,values\nrectified,1,2,1,1\nlayer0.weight,1,1,2\nlayer0.bias,1,1,0\n"
      "layer1.weight,1,2,1,1\nlayer1.bias,1,1,0\n");
   EXPECT_THROW(load_model(chain), ParseError);
}

TEST(TraceCsv, WideAndTidyLayouts)
{
   TrainConfig c = small_config();
   c.steps = 20;
   const auto r = train(c);
   std::stringstream wide;
   write_trace_csv(wide, r.trace);
   std::string header;
   std::getline(wide, header);
   EXPECT_EQ(header.rfind("step,learning_rate,invariance,", 0), 0u);
   int rows = 0;
   for (std::string line; std::getline(wide, line);) {
      ++rows;
   }
   EXPECT_EQ(rows, 3);

   std::stringstream tidy;
   write_trace_tidy_csv(tidy, r.trace);
   std::getline(tidy, header);
   EXPECT_EQ(header, "step,metric,value");
   std::string first;
   std::getline(tidy, first);
   EXPECT_EQ(first.rfind("0,learning_rate,", 0), 0u);
   int long_rows = 1;
   for (std::string line; std::getline(tidy, line);) {
      ++long_rows;
   }
   EXPECT_EQ(long_rows, 3 * 13);
}

TEST(TrainJson, RoundTripAndErrors)
{
   TrainConfig c = small_config();
   c.policy = ProjectionPolicy::random_plus_bottom_eig;
   c.eig_count = 3;
   c.target = {2.0, -0.5, 1.25};
   c.seed = 18'000'000'000'000'000'000ULL;
   const TrainConfig back = train_config_from_json(to_json(c));
   EXPECT_EQ(to_json(back), to_json(c));
   EXPECT_EQ(back.seed, c.seed);

   const auto rule = train_config_from_json(nlohmann::json::parse(R"({"target": {"p": 2, "mu": 0, "sigma_rule": "rgn"}})"));
   EXPECT_NEAR(rule.target.sigma, 1.0 / std::sqrt(0.5 - 0.5 / std::numbers::pi), 1e-8);
   const auto gn = train_config_from_json(nlohmann::json::parse(R"({"target": {"p": 2, "mu": 1}})"));
   EXPECT_EQ(gn.target.sigma, sigma_gn(2.0));

   EXPECT_THROW(train_config_from_json(nlohmann::json::parse(R"({"batchsize": 3})")), ParseError);
   EXPECT_THROW(train_config_from_json(nlohmann::json::parse(R"({"batch": -3})")), ParseError);
   EXPECT_THROW(train_config_from_json(nlohmann::json::parse(R"({"batch": "many"})")), ParseError);
   EXPECT_THROW(train_config_from_json(nlohmann::json::parse(R"({"steps": 0})")), DomainError);
   EXPECT_THROW(train_config_from_json(nlohmann::json::parse(R"({"policy": "diagonal"})")), DomainError);
   EXPECT_THROW(train_config_from_json(nlohmann::json::parse("[1, 2]")), ParseError);
}

TEST(TrainJson, SummaryCarriesFinalRecord)
{
   TrainConfig c = small_config();
   c.steps = 10;
   const auto r = train(c);
   const auto s = train_summary(c, r);
   EXPECT_EQ(s["records"], 2);
   EXPECT_EQ(s["final"]["step"], 10);
   EXPECT_EQ(s["final"]["m_l0"].get<double>(), r.trace.records.back().sparsity.m_l0);
   EXPECT_EQ(s["predicted_m_l0"].get<double>(), 0.5);
   EXPECT_EQ(s["final"]["feature_variance"].size(), 6u);
}
