#include "rgg/trainer.hpp"

#include "rgg/errors.hpp"

#include "radix_order.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace rgg {

std::size_t EncoderModel::parameter_count() const
{
   std::size_t n = 0;
   for (const auto& l : layers) {
      n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
   }
   return n;
}

double ModelGradient::squared_norm() const
{
   double s = 0.0;
   for (const auto& l : layers) {
      s += l.weight.squaredNorm() + l.bias.squaredNorm();
   }
   return s;
}

EncoderModel init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                          bool hidden_rectified, Rng& rng)
{
   if (input_dim == 0 || output_dim == 0) {
      throw DomainError("init_encoder: dimensions must be positive");
   }
   std::vector<std::size_t> widths{input_dim};
   if (hidden_dim > 0) {
      widths.push_back(hidden_dim);
   }
   widths.push_back(output_dim);

   EncoderModel model;
   model.hidden_rectified = hidden_rectified;
   for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      const auto in = static_cast<Eigen::Index>(widths[l]);
      const auto out = static_cast<Eigen::Index>(widths[l + 1]);
      const double scale = std::sqrt(2.0 / static_cast<double>(in));
      AffineLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
      for (Eigen::Index i = 0; i < out; ++i) {
         for (Eigen::Index j = 0; j < in; ++j) {
            layer.weight(i, j) = scale * rng.normal();
         }
      }
      model.layers.push_back(std::move(layer));
   }
   return model;
}

namespace {

bool rectified_after(const EncoderModel& model, std::size_t layer)
{
   return layer + 1 == model.layers.size() ? model.output_rectified : model.hidden_rectified;
}

// Pre-activations and layer inputs for one batch; act[0] is the input.
struct Pass {
   std::vector<Eigen::MatrixXd> pre;
   std::vector<Eigen::MatrixXd> act;
};

Pass run_forward(const EncoderModel& model, const SampleMatrix& x)
{
   if (model.layers.empty()) {
      throw DomainError("forward: model has no layers");
   }
   if (x.cols() != model.input_dim()) {
      throw ShapeMismatch("forward: input width " + std::to_string(x.cols()) + " but model expects "
                          + std::to_string(model.input_dim()));
   }
   Pass pass;
   pass.act.push_back(x);
   for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const auto& layer = model.layers[l];
      Eigen::MatrixXd pre = pass.act.back() * layer.weight.transpose();
      pre.rowwise() += layer.bias.transpose();
      pass.act.push_back(rectified_after(model, l) ? Eigen::MatrixXd(pre.cwiseMax(0.0)) : pre);
      pass.pre.push_back(std::move(pre));
   }
   return pass;
}

ModelGradient zero_gradient(const EncoderModel& model)
{
   ModelGradient g;
   for (const auto& l : model.layers) {
      g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                          Eigen::VectorXd::Zero(l.bias.size())});
   }
   return g;
}

void accumulate_branch(const EncoderModel& model, const Pass& pass, Eigen::MatrixXd d_out, ModelGradient& g)
{
   for (std::size_t l = model.layers.size(); l-- > 0;) {
      if (rectified_after(model, l)) {
         // subgradient 0 at the kink
         d_out = (pass.pre[l].array() > 0.0).select(d_out, 0.0);
      }
      g.layers[l].weight.noalias() += d_out.transpose() * pass.act[l];
      g.layers[l].bias += d_out.colwise().sum().transpose();
      if (l > 0) {
         d_out = d_out * model.layers[l].weight;
      }
   }
}

} // namespace

SampleMatrix forward(const EncoderModel& model, const SampleMatrix& x)
{
   return std::move(run_forward(model, x).act.back());
}

BackwardResult backward(const EncoderModel& model, const SampleMatrix& x, const SampleMatrix& xprime,
                        const SampleMatrix& y, const ProjectionSet& proj, double lambda_sim,
                        double lambda_dist)
{
   if (x.rows() != xprime.rows()) {
      throw ShapeMismatch("backward: views have different batch sizes");
   }
   const Pass p1 = run_forward(model, x);
   const Pass p2 = run_forward(model, xprime);
   LossWithGradient lg =
      rdmreg_loss_with_gradient(p1.act.back(), p2.act.back(), y, proj, lambda_sim, lambda_dist);
   BackwardResult out{lg.loss, zero_gradient(model)};
   accumulate_branch(model, p1, std::move(lg.d_z), out.grad);
   accumulate_branch(model, p2, std::move(lg.d_zprime), out.grad);
   return out;
}

BackwardResult backward(const EncoderModel& model, const SampleMatrix& x, const SampleMatrix& xprime,
                        const RGGParams& target, const ProjectionSet& proj, double lambda_sim,
                        double lambda_dist, std::uint64_t seed)
{
   Rng rng(seed);
   const SampleMatrix y = sample_rgn(target, static_cast<std::size_t>(x.rows()),
                                     static_cast<std::size_t>(model.output_dim()), rng);
   return backward(model, x, xprime, y, proj, lambda_sim, lambda_dist);
}

namespace {

// Everything the piecewise structure of the loss depends on: the sign pattern
// of every rectified pre-activation and the stable sort order of every
// projected column, for both views.
struct Region {
   std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> signs;
   std::vector<std::vector<std::uint32_t>> orders;

   bool operator==(const Region& other) const
   {
      if (orders != other.orders || signs.size() != other.signs.size()) {
         return false;
      }
      for (std::size_t i = 0; i < signs.size(); ++i) {
         if ((signs[i] != other.signs[i]).any()) {
            return false;
         }
      }
      return true;
   }
};

Region region_of(const EncoderModel& model, const SampleMatrix& x, const SampleMatrix& xprime,
                 const ProjectionSet& proj)
{
   Region r;
   for (const SampleMatrix* input : {&x, &xprime}) {
      const Pass pass = run_forward(model, *input);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
         if (rectified_after(model, l)) {
            r.signs.push_back(pass.pre[l].array() > 0.0);
         }
      }
      const Eigen::MatrixXd zp = pass.act.back() * proj.directions.transpose();
      detail::RadixOrder sorter;
      for (Eigen::Index c = 0; c < zp.cols(); ++c) {
         sorter.sort(zp.col(c).data(), static_cast<std::size_t>(zp.rows()));
         r.orders.push_back(sorter.order());
      }
   }
   return r;
}

double& coordinate(EncoderModel& model, std::size_t index)
{
   for (auto& l : model.layers) {
      const auto nw = static_cast<std::size_t>(l.weight.size());
      if (index < nw) {
         return l.weight.data()[index];
      }
      index -= nw;
      const auto nb = static_cast<std::size_t>(l.bias.size());
      if (index < nb) {
         return l.bias.data()[index];
      }
      index -= nb;
   }
   throw DomainError("coordinate index out of range");
}

double coordinate(const ModelGradient& g, std::size_t index)
{
   for (const auto& l : g.layers) {
      const auto nw = static_cast<std::size_t>(l.weight.size());
      if (index < nw) {
         return l.weight.data()[index];
      }
      index -= nw;
      const auto nb = static_cast<std::size_t>(l.bias.size());
      if (index < nb) {
         return l.bias.data()[index];
      }
      index -= nb;
   }
   throw DomainError("coordinate index out of range");
}

} // namespace

GradientCheck check_gradient(const EncoderModel& model, const SampleMatrix& x, const SampleMatrix& xprime,
                             const SampleMatrix& y, const ProjectionSet& proj, double lambda_sim,
                             double lambda_dist, std::size_t coordinates, double h, Rng& rng)
{
   if (!(h > 0.0)) {
      throw DomainError("check_gradient: step must be positive");
   }
   const BackwardResult analytic = backward(model, x, xprime, y, proj, lambda_sim, lambda_dist);
   const Region base = region_of(model, x, xprime, proj);
   const double floor = 1e-10 * (1.0 + std::abs(analytic.loss.total)) / h;
   const std::size_t n_params = model.parameter_count();

   GradientCheck out;
   EncoderModel probe = model;
   const std::size_t max_draws = 20 * coordinates;
   for (std::size_t draw = 0; draw < max_draws && out.checked < coordinates; ++draw) {
      const auto index = static_cast<std::size_t>(rng.below(n_params));
      double& theta = coordinate(probe, index);
      const double saved = theta;

      theta = saved + h;
      const bool plus_ok = region_of(probe, x, xprime, proj) == base;
      const double up = rdmreg_loss(forward(probe, x), forward(probe, xprime), y, proj, lambda_sim, lambda_dist).total;
      theta = saved - h;
      const bool minus_ok = region_of(probe, x, xprime, proj) == base;
      const double down =
         rdmreg_loss(forward(probe, x), forward(probe, xprime), y, proj, lambda_sim, lambda_dist).total;
      theta = saved;

      if (!plus_ok || !minus_ok) {
         ++out.skipped;
         continue;
      }
      const double numeric = (up - down) / (2.0 * h);
      const double exact = coordinate(analytic.grad, index);
      const double scale = std::max(std::abs(numeric), std::abs(exact));
      if (scale < floor) {
         ++out.negligible;
         continue;
      }
      ++out.checked;
      out.max_rel_error = std::max(out.max_rel_error, std::abs(numeric - exact) / scale);
   }
   return out;
}

SyntheticDataset make_dataset(std::size_t input_dim, std::size_t clusters, std::uint64_t dataset_seed)
{
   if (input_dim == 0 || clusters == 0) {
      throw DomainError("make_dataset: input_dim and clusters must be positive");
   }
   Rng rng(dataset_seed);
   SyntheticDataset data;
   data.centers.resize(static_cast<Eigen::Index>(clusters), static_cast<Eigen::Index>(input_dim));
   for (Eigen::Index i = 0; i < data.centers.rows(); ++i) {
      for (Eigen::Index j = 0; j < data.centers.cols(); ++j) {
         data.centers(i, j) = rng.normal();
      }
   }
   return data;
}

ViewPair generate_views(const SyntheticDataset& data, std::size_t n, double noise_scale, Rng& rng)
{
   if (n == 0) {
      throw DomainError("generate_views: n must be at least 1");
   }
   if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
      throw DomainError("generate_views: noise_scale must be finite and non-negative");
   }
   const Eigen::Index d = data.centers.cols();
   ViewPair v{SampleMatrix(static_cast<Eigen::Index>(n), d), SampleMatrix(static_cast<Eigen::Index>(n), d)};
   for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(data.centers.rows())));
      for (Eigen::Index j = 0; j < d; ++j) {
         const double anchor = data.centers(k, j) + data.cluster_spread * rng.normal();
         v.x(i, j) = anchor + noise_scale * rng.normal();
         v.xprime(i, j) = anchor + noise_scale * rng.normal();
      }
   }
   return v;
}

ViewPair generate_views(std::size_t n, std::size_t input_dim, double noise_scale, std::uint64_t seed)
{
   Rng rng(seed);
   return generate_views(make_dataset(input_dim, 4, default_dataset_seed), n, noise_scale, rng);
}

void TrainConfig::validate() const
{
   auto positive = [](std::size_t v, const char* name) {
      if (v == 0) {
         throw DomainError(std::string("train config: ") + name + " must be positive");
      }
   };
   positive(input_dim, "input_dim");
   positive(feature_dim, "feature_dim");
   positive(batch, "batch");
   positive(steps, "steps");
   positive(projections, "projections");
   positive(clusters, "clusters");
   positive(log_every, "log_every");
   positive(eval_samples, "eval_samples");
   if (batch < 2 || eval_samples < 2) {
      throw DomainError("train config: batch and eval_samples must be at least 2");
   }
   if (!(lambda_sim >= 0.0) || !(lambda_dist >= 0.0) || !std::isfinite(lambda_sim + lambda_dist)) {
      throw DomainError("train config: lambdas must be finite and non-negative");
   }
   if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw DomainError("train config: learning_rate must be positive");
   }
   if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw DomainError("train config: momentum must lie in [0, 1)");
   }
   if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
      throw DomainError("train config: noise_scale must be finite and non-negative");
   }
   if (!(grad_clip >= 0.0)) {
      throw DomainError("train config: grad_clip must be non-negative");
   }
   if (!(gradient_check_step > 0.0)) {
      throw DomainError("train config: gradient_check_step must be positive");
   }
   if (eig_count && *eig_count == 0) {
      throw DomainError("train config: eig_count must be positive");
   }
   target.validate();
}

double learning_rate_at(const TrainConfig& config, std::size_t step)
{
   const double base = config.learning_rate;
   if (step < config.warmup_steps) {
      return base * static_cast<double>(step + 1) / static_cast<double>(config.warmup_steps);
   }
   const std::size_t decay = config.steps > config.warmup_steps ? config.steps - config.warmup_steps : 1;
   const double t = std::min(1.0, static_cast<double>(step - config.warmup_steps) / static_cast<double>(decay));
   return 0.5 * base * (1.0 + std::cos(std::numbers::pi * t));
}

double target_variance(const TrainConfig& config)
{
   return config.target_kind == TargetKind::dense ? gn_variance(config.target)
                                                  : rgn_moments(config.target).variance;
}

namespace {

SampleMatrix draw_target(const TrainConfig& config, std::size_t n, Rng& rng)
{
   return config.target_kind == TargetKind::dense ? sample_gn(config.target, n, config.feature_dim, rng)
                                                  : sample_rgn(config.target, n, config.feature_dim, rng);
}

bool finite(const EncoderModel& model)
{
   for (const auto& l : model.layers) {
      if (!l.weight.allFinite() || !l.bias.allFinite()) {
         return false;
      }
   }
   return true;
}

// Held-out views and the fixed target sample / directions for the sliced
// statistic, all drawn once per run.
struct Evaluation {
   SampleMatrix x;
   SampleMatrix y;
   ProjectionSet proj;
};

void fill_diagnostics(const EncoderModel& model, const Evaluation& eval, double target_var, TraceRecord& rec)
{
   const SampleMatrix z = forward(model, eval.x);
   rec.sparsity = sparsity_metrics(z);
   rec.vcreg = vcreg_diagnostics(z, target_var);
   rec.feature_variance = column_variances(z);
   rec.sliced_stat = z.allFinite() ? sliced_w2(z, eval.y, eval.proj) : std::nan("");
}

} // namespace

TrainResult train(const TrainConfig& config)
{
   config.validate();
   Rng master(config.seed);
   Rng init_rng(master.split());
   Rng data_rng(master.split());
   Rng target_rng(master.split());
   Rng proj_rng(master.split());
   Rng check_rng(master.split());
   Rng eval_rng(master.split());

   TrainResult result;
   result.model = init_encoder(config.input_dim, config.hidden_dim, config.feature_dim, config.hidden_rectified,
                               init_rng);
   result.model.output_rectified = config.target_kind == TargetKind::rectified;
   EncoderModel& model = result.model;

   const SyntheticDataset data = make_dataset(config.input_dim, config.clusters, config.dataset_seed);
   Evaluation eval;
   eval.x = generate_views(data, config.eval_samples, config.noise_scale, eval_rng).x;
   eval.y = draw_target(config, config.eval_samples, eval_rng);
   eval.proj = sample_sphere_projections(config.projections, config.feature_dim, eval_rng);
   const double target_var = target_variance(config);

   ModelGradient velocity = zero_gradient(model);
   for (std::size_t step = 0; step <= config.steps; ++step) {
      const bool last = step == config.steps;
      const bool logged = last || step % config.log_every == 0;
      if (last && !logged) {
         break;
      }

      const ViewPair views = generate_views(data, config.batch, config.noise_scale, data_rng);
      const SampleMatrix y = draw_target(config, config.batch, target_rng);
      ProjectionSet proj;
      if (config.policy == ProjectionPolicy::random_sphere) {
         proj = sample_sphere_projections(config.projections, config.feature_dim, proj_rng);
      } else {
         proj = make_projections(config.policy, config.projections, forward(model, views.x), proj_rng,
                                 config.eig_count);
      }
      BackwardResult br;
      try {
         br = backward(model, views.x, views.xprime, y, proj, config.lambda_sim, config.lambda_dist);
      } catch (const DegenerateInput&) {
         if (forward(model, views.x).allFinite() && forward(model, views.xprime).allFinite()) {
            throw;
         }
         throw Divergence("train: non-finite features at step " + std::to_string(step), step);
      }
      if (!std::isfinite(br.loss.total)) {
         throw Divergence("train: non-finite loss at step " + std::to_string(step), step);
      }

      if (logged) {
         TraceRecord rec;
         rec.step = step;
         rec.learning_rate = last ? 0.0 : learning_rate_at(config, step);
         rec.loss = br.loss;
         fill_diagnostics(model, eval, target_var, rec);
         if (config.gradient_check_coordinates > 0) {
            rec.gradient_check = check_gradient(model, views.x, views.xprime, y, proj, config.lambda_sim,
                                                config.lambda_dist, config.gradient_check_coordinates,
                                                config.gradient_check_step, check_rng);
         }
         result.trace.records.push_back(std::move(rec));
      }
      if (last) {
         break;
      }

      const double lr = learning_rate_at(config, step);
      const double norm = std::sqrt(br.grad.squared_norm());
      const double shrink = config.grad_clip > 0.0 && norm > config.grad_clip ? config.grad_clip / norm : 1.0;
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
         velocity.layers[l].weight = config.momentum * velocity.layers[l].weight + shrink * br.grad.layers[l].weight;
         velocity.layers[l].bias = config.momentum * velocity.layers[l].bias + shrink * br.grad.layers[l].bias;
         model.layers[l].weight -= lr * velocity.layers[l].weight;
         model.layers[l].bias -= lr * velocity.layers[l].bias;
      }
      if (!finite(model)) {
         throw Divergence("train: non-finite weights after step " + std::to_string(step), step);
      }
   }
   return result;
}

PolicyComparison compare_projection_policies(const TrainConfig& config)
{
   TrainConfig random = config;
   random.policy = ProjectionPolicy::random_sphere;
   TrainConfig eigen = config;
   eigen.policy = ProjectionPolicy::random_plus_bottom_eig;
   return {train(random).trace, train(eigen).trace};
}

namespace {

void write_tensor(std::ostream& out, const std::string& name, Eigen::Index rows, Eigen::Index cols,
                  const double* row_major)
{
   out << name << ',' << rows << ',' << cols;
   for (Eigen::Index i = 0; i < rows * cols; ++i) {
      out << ',' << row_major[i];
   }
   out << '\n';
}

} // namespace

void save_model(std::ostream& out, const EncoderModel& model)
{
   const auto old_precision = out.precision(17);
   out << "tensor,rows,cols,values\n";
   const double flags[2] = {model.hidden_rectified ? 1.0 : 0.0, model.output_rectified ? 1.0 : 0.0};
   write_tensor(out, "rectified", 1, 2, flags);
   for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const auto& layer = model.layers[l];
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = layer.weight;
      write_tensor(out, "layer" + std::to_string(l) + ".weight", w.rows(), w.cols(), w.data());
      write_tensor(out, "layer" + std::to_string(l) + ".bias", layer.bias.size(), 1, layer.bias.data());
   }
   out.precision(old_precision);
}

void save_model(const std::string& path, const EncoderModel& model)
{
   std::ofstream out(path);
   if (!out) {
      throw ParseError("cannot open " + path + " for writing", 0);
   }
   save_model(out, model);
   if (!out) {
      throw ParseError("write failed for " + path, 0);
   }
}

namespace {

struct Tensor {
   std::string name;
   Eigen::Index rows = 0;
   Eigen::Index cols = 0;
   std::vector<double> values;
};

Tensor parse_tensor(const std::string& line, std::size_t line_no)
{
   std::vector<std::string> fields;
   std::stringstream ss(line);
   std::string field;
   while (std::getline(ss, field, ',')) {
      fields.push_back(field);
   }
   if (fields.size() < 3) {
      throw ParseError("model CSV: expected tensor,rows,cols,values", line_no);
   }
   Tensor t;
   t.name = fields[0];
   try {
      std::size_t used = 0;
      t.rows = std::stol(fields[1], &used);
      if (used != fields[1].size()) {
         throw std::invalid_argument("rows");
      }
      t.cols = std::stol(fields[2], &used);
      if (used != fields[2].size()) {
         throw std::invalid_argument("cols");
      }
      for (std::size_t i = 3; i < fields.size(); ++i) {
         const double v = std::stod(fields[i], &used);
         if (used != fields[i].size() || !std::isfinite(v)) {
            throw std::invalid_argument("value");
         }
         t.values.push_back(v);
      }
   } catch (const std::exception&) {
      throw ParseError("model CSV: malformed number in tensor " + t.name, line_no);
   }
   if (t.rows < 1 || t.cols < 1 || static_cast<std::size_t>(t.rows * t.cols) != t.values.size()) {
      throw ParseError("model CSV: tensor " + t.name + " has the wrong number of values", line_no);
   }
   return t;
}

} // namespace

EncoderModel load_model(std::istream& in)
{
   std::string line;
   std::size_t line_no = 1;
   if (!std::getline(in, line) || line != "tensor,rows,cols,values") {
      throw ParseError("model CSV: missing header", 1);
   }
   EncoderModel model;
   bool have_flags = false;
   while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) {
         continue;
      }
      const Tensor t = parse_tensor(line, line_no);
      if (t.name == "rectified") {
         if (t.values.size() != 2) {
            throw ParseError("model CSV: rectified row needs two flags", line_no);
         }
         model.hidden_rectified = t.values[0] != 0.0;
         model.output_rectified = t.values[1] != 0.0;
         have_flags = true;
         continue;
      }
      const std::string expected = "layer" + std::to_string(model.layers.size());
      if (t.name == expected + ".weight") {
         AffineLayer layer;
         layer.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            t.values.data(), t.rows, t.cols);
         model.layers.push_back(std::move(layer));
      } else if (!model.layers.empty() && model.layers.back().bias.size() == 0
                 && t.name == "layer" + std::to_string(model.layers.size() - 1) + ".bias") {
         if (t.cols != 1 || t.rows != model.layers.back().weight.rows()) {
            throw ParseError("model CSV: bias shape does not match weight rows", line_no);
         }
         model.layers.back().bias = Eigen::Map<const Eigen::VectorXd>(t.values.data(), t.rows);
      } else {
         throw ParseError("model CSV: unexpected tensor " + t.name, line_no);
      }
   }
   if (!have_flags || model.layers.empty() || model.layers.size() > 2) {
      throw ParseError("model CSV: expected flags and one or two layers", line_no);
   }
   for (std::size_t l = 0; l < model.layers.size(); ++l) {
      if (model.layers[l].bias.size() == 0) {
         throw ParseError("model CSV: layer" + std::to_string(l) + " has no bias", line_no);
      }
      if (l > 0 && model.layers[l].weight.cols() != model.layers[l - 1].weight.rows()) {
         throw ParseError("model CSV: layer widths do not chain", line_no);
      }
   }
   return model;
}

EncoderModel load_model(const std::string& path)
{
   std::ifstream in(path);
   if (!in) {
      throw ParseError("cannot open " + path, 0);
   }
   return load_model(in);
}

namespace {

// Named scalar columns shared by the wide and tidy trace writers.
std::vector<std::pair<std::string, double>> record_metrics(const TraceRecord& r)
{
   const double nan = std::nan("");
   std::vector<std::pair<std::string, double>> m{
      {"learning_rate", r.learning_rate},
      {"invariance", r.loss.invariance},
      {"rdmreg_view1", r.loss.rdmreg_view1},
      {"rdmreg_view2", r.loss.rdmreg_view2},
      {"total", r.loss.total},
      {"m_l1", r.sparsity.m_l1.value_or(nan)},
      {"m_l0", r.sparsity.m_l0},
      {"zero_fraction", r.sparsity.zero_fraction},
      {"variance_loss", r.vcreg.variance_loss},
      {"covariance_loss", r.vcreg.covariance_loss},
      {"sliced_stat", r.sliced_stat},
      {"min_feature_variance", r.feature_variance.size() > 0 ? r.feature_variance.minCoeff() : nan},
      {"grad_check_max_rel_error", r.gradient_check ? r.gradient_check->max_rel_error : nan},
   };
   return m;
}

} // namespace

void write_trace_csv(std::ostream& out, const TrainTrace& trace)
{
   const auto old_precision = out.precision(17);
   out << "step";
   if (!trace.records.empty()) {
      for (const auto& [name, value] : record_metrics(trace.records.front())) {
         out << ',' << name;
      }
   }
   out << '\n';
   for (const auto& r : trace.records) {
      out << r.step;
      for (const auto& [name, value] : record_metrics(r)) {
         out << ',' << value;
      }
      out << '\n';
   }
   out.precision(old_precision);
}

void write_trace_tidy_csv(std::ostream& out, const TrainTrace& trace)
{
   const auto old_precision = out.precision(17);
   out << "step,metric,value\n";
   for (const auto& r : trace.records) {
      for (const auto& [name, value] : record_metrics(r)) {
         out << r.step << ',' << name << ',' << value << '\n';
      }
   }
   out.precision(old_precision);
}

} // namespace rgg
