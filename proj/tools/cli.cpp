#include "cli.hpp"

#include "rgg/dependence.hpp"
#include "rgg/distributions.hpp"
#include "rgg/entropy.hpp"
#include "rgg/errors.hpp"
#include "rgg/parallel.hpp"
#include "rgg/slicing.hpp"
#include "rgg/train_json.hpp"
#include "rgg/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>

namespace rgg {

namespace {

using nlohmann::json;

// Bad combinations of flags and unreadable files; always exit code 2.
class UsageError : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

json read_json(const std::string& path)
{
   std::ifstream in(path);
   if (!in) {
      throw UsageError("cannot open '" + path + "'");
   }
   try {
      return json::parse(in);
   } catch (const json::parse_error& e) {
      throw ParseError(path + ": " + e.what(), 0);
   }
}

SampleMatrix read_matrix(const std::string& path)
{
   std::ifstream in(path);
   if (!in) {
      throw UsageError("cannot open '" + path + "'");
   }
   try {
      return read_csv(in);
   } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), e.line());
   }
}

// Writes through a caller-supplied function so every output file gets the
// same open and flush checks.
void write_file(const std::string& path, const std::function<void(std::ostream&)>& body)
{
   std::ofstream out(path);
   if (!out) {
      throw UsageError("cannot open '" + path + "' for writing");
   }
   body(out);
   out.flush();
   if (!out) {
      throw UsageError("write failed for '" + path + "'");
   }
}

// Fills every option the command line left unset from a JSON object whose
// keys are the long flag names with '_' for '-'. Values go through the same
// conversion and validators as typed flags.
void apply_config(CLI::App& sub, const std::string& path)
{
   const json j = read_json(path);
   if (!j.is_object()) {
      throw ParseError(path + ": expected a JSON object", 0);
   }
   for (const auto& [key, value] : j.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      CLI::Option* opt = name == "config" ? nullptr : sub.get_option_no_throw("--" + name);
      if (opt == nullptr) {
         throw UsageError(path + ": unknown key \"" + key + "\" for " + sub.get_name());
      }
      if (opt->count() > 0 || value.is_null()) {
         continue;
      }
      if (value.is_string()) {
         opt->add_result(value.get<std::string>());
      } else if (value.is_number() || value.is_boolean()) {
         opt->add_result(value.dump());
      } else {
         throw UsageError(path + ": \"" + key + "\" must be a number, string or boolean");
      }
      opt->run_callback();
   }
}

struct TargetFlags {
   double p = 2.0;
   double mu = 0.0;
   std::optional<double> sigma;
   std::optional<std::string> sigma_rule;
};

void add_target_flags(CLI::App* sub, TargetFlags& t)
{
   sub->add_option("--p", t.p, "shape exponent")->capture_default_str();
   sub->add_option("--mu", t.mu, "location before rectification")->capture_default_str();
   sub->add_option("--sigma", t.sigma, "explicit scale");
   sub->add_option("--sigma-rule", t.sigma_rule, "scale rule when --sigma is absent (default gn)")
      ->check(CLI::IsMember({"gn", "rgn"}));
}

struct ResolvedTarget {
   RGGParams params;
   json echo;
};

ResolvedTarget resolve_target(const TargetFlags& t)
{
   if (t.sigma && t.sigma_rule) {
      throw UsageError("give either --sigma or --sigma-rule, not both");
   }
   ResolvedTarget r{{t.p, t.mu, 1.0}, {{"p", t.p}, {"mu", t.mu}}};
   if (t.sigma) {
      r.params.sigma = *t.sigma;
      r.echo["sigma_rule"] = nullptr;
   } else {
      const std::string rule = t.sigma_rule.value_or("gn");
      if (rule == "gn") {
         r.params.sigma = sigma_gn(t.p);
      } else {
         const ScaleSolution s = sigma_rgn(t.p, t.mu);
         r.params.sigma = s.sigma;
         r.echo["sigma_solution"] = {
            {"sigma", s.sigma}, {"iterations", s.iterations}, {"variance", s.variance}};
      }
      r.echo["sigma_rule"] = rule;
   }
   r.params.validate();
   r.echo["sigma"] = r.params.sigma;
   return r;
}

json moments_json(const MomentSummary& m)
{
   return {{"mean", m.mean}, {"second_moment", m.second_moment}, {"variance", m.variance}};
}

struct Common {
   std::optional<std::string> config;
   unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c)
{
   sub->add_option("--config", c.config, "JSON file supplying any flag; flags given here win")
      ->check(CLI::ExistingFile);
   sub->add_option("--threads", c.threads, "worker threads; 1 is bit-reproducible")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

template <typename T>
const T& required(const std::optional<T>& v, const char* flag)
{
   if (!v) {
      throw UsageError(std::string(flag) + " is required");
   }
   return *v;
}

// --- sample --------------------------------------------------------------

struct SampleArgs {
   TargetFlags target;
   std::size_t n = 0;
   std::size_t d = 1;
   std::uint64_t seed = 0;
   std::optional<std::string> out;
};

json cmd_sample(const SampleArgs& a)
{
   const auto target = resolve_target(a.target);
   const std::string& path = required(a.out, "--out");
   Rng rng(a.seed);
   const SampleMatrix y = sample_rgn(target.params, a.n, a.d, rng);
   write_file(path, [&](std::ostream& os) { write_csv(os, y); });

   const auto zeros = (y.array() == 0.0).count();
   const double mean = y.mean();
   const double second = y.array().square().mean();
   return {{"command", "sample"},
           {"target", target.echo},
           {"n", a.n},
           {"d", a.d},
           {"seed", a.seed},
           {"out", path},
           {"zero_fraction", static_cast<double>(zeros) / static_cast<double>(y.size())},
           {"moments", moments_json(rgn_moments(target.params))},
           {"empirical", {{"mean", mean}, {"second_moment", second}, {"variance", second - mean * mean}}}};
}

// --- predict-l0 and moments ------------------------------------------------

struct PredictArgs {
   TargetFlags target;
   std::size_t d = 1;
};

json cmd_predict_l0(const PredictArgs& a)
{
   const auto target = resolve_target(a.target);
   return {{"command", "predict-l0"},
           {"target", target.echo},
           {"d", a.d},
           {"per_dimension", nonzero_probability(target.params)},
           {"expected_l0", expected_l0(target.params, a.d)}};
}

json cmd_moments(const TargetFlags& t)
{
   const auto target = resolve_target(t);
   return {{"command", "moments"},
           {"target", target.echo},
           {"moments", moments_json(rgn_moments(target.params))},
           {"zero_mass", 1.0 - nonzero_probability(target.params)}};
}

// --- entropy ---------------------------------------------------------------

struct EntropyArgs {
   std::optional<std::string> in;
   std::optional<std::size_t> m;
   double eps = 0.0;
};

json cmd_entropy(const EntropyArgs& a)
{
   const std::string& path = required(a.in, "--in");
   const SampleMatrix z = read_matrix(path);
   json columns = json::array();
   for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const DDimEntropy h = ddim_entropy_empirical(z.col(j), a.m, a.eps);
      json col{{"info_dim", h.info_dim},
               {"entropy", h.entropy},
               {"bernoulli_part", h.bernoulli_part},
               {"continuous_available", h.continuous_available}};
      col["continuous_part"] = h.continuous_available ? json(h.continuous_part) : json(nullptr);
      columns.push_back(col);
   }
   return {{"command", "entropy"},
           {"in", path},
           {"rows", z.rows()},
           {"m", a.m ? json(*a.m) : json(nullptr)},
           {"eps", a.eps},
           {"columns", columns},
           {"marginal_sum", marginal_entropy_sum(z, a.m, a.eps)}};
}

// --- rdmreg ----------------------------------------------------------------

struct RdmregArgs {
   std::optional<std::string> z;
   std::optional<std::string> zprime;
   TargetFlags target;
   std::size_t projections = 512;
   std::string policy = "random_sphere";
   std::optional<std::size_t> eig_count;
   std::uint64_t seed = 0;
   double lambda_sim = default_lambda_sim;
   double lambda_dist = default_lambda_dist;
};

// Projections come from Rng(seed) first, then the target sample uses the
// next split of the same generator.
json cmd_rdmreg(const RdmregArgs& a)
{
   const std::string& z_path = required(a.z, "--z");
   const std::string& zp_path = required(a.zprime, "--zprime");
   const auto target = resolve_target(a.target);
   const SampleMatrix z = read_matrix(z_path);
   const SampleMatrix zp = read_matrix(zp_path);
   const ProjectionPolicy policy = parse_projection_policy(a.policy);
   Rng rng(a.seed);
   const ProjectionSet proj = make_projections(policy, a.projections, z, rng, a.eig_count);
   const LossBreakdown loss =
      rdmreg_loss(z, zp, target.params, proj, a.lambda_sim, a.lambda_dist, rng.split());
   return {{"command", "rdmreg"},
           {"z", z_path},
           {"zprime", zp_path},
           {"target", target.echo},
           {"projections", a.projections},
           {"policy", a.policy},
           {"eig_count", a.eig_count ? json(*a.eig_count) : json(nullptr)},
           {"seed", a.seed},
           {"lambda_sim", a.lambda_sim},
           {"lambda_dist", a.lambda_dist},
           {"loss",
            {{"invariance", loss.invariance},
             {"rdmreg_view1", loss.rdmreg_view1},
             {"rdmreg_view2", loss.rdmreg_view2},
             {"total", loss.total}}}};
}

// --- hsic ------------------------------------------------------------------

struct HsicArgs {
   std::optional<std::string> in;
   std::string rule = "automatic";
   std::optional<double> bandwidth;
};

json cmd_hsic(const HsicArgs& a)
{
   const std::string& path = required(a.in, "--in");
   const SampleMatrix z = read_matrix(path);
   KernelSpec kernel;
   if (a.rule == "median_pairwise") {
      kernel.rule = BandwidthRule::median_pairwise;
   } else if (a.rule == "positive_std") {
      kernel.rule = BandwidthRule::positive_std;
   }
   kernel.bandwidth_override = a.bandwidth;
   const NhsicSummary s = nhsic_offdiag_mean(z, kernel);
   return {{"command", "hsic"},
           {"in", path},
           {"bandwidth_rule", a.rule},
           {"bandwidth", a.bandwidth ? json(*a.bandwidth) : json(nullptr)},
           {"nhsic_offdiag_mean", s.mean},
           {"pairs_used", s.pairs_used},
           {"excluded_columns", s.excluded_columns}};
}

// --- train -----------------------------------------------------------------

// Flags override keys of the training config file, which uses the trainer's
// own JSON layout (nested "target"). Output paths and the thread count may
// also sit in that file under "outputs" and "threads".
struct TrainArgs {
   std::map<std::string, std::optional<std::uint64_t>> counts;
   std::map<std::string, std::optional<double>> reals;
   std::map<std::string, std::optional<std::string>> strings;
   std::optional<bool> hidden_rectified;
   std::optional<double> p;
   std::optional<double> mu;
   std::optional<double> sigma;
   std::optional<std::string> sigma_rule;
   std::optional<std::string> config;
   std::optional<unsigned> threads;
   std::map<std::string, std::optional<std::string>> outputs;
};

std::string flag_name(const std::string& key)
{
   std::string name = "--" + key;
   std::replace(name.begin(), name.end(), '_', '-');
   return name;
}

void add_train_flags(CLI::App* sub, TrainArgs& a)
{
   for (const char* key : {"input_dim", "hidden_dim", "feature_dim", "batch", "steps", "projections",
                           "eig_count", "warmup_steps", "seed", "dataset_seed", "clusters", "log_every",
                           "eval_samples", "gradient_check_coordinates"}) {
      sub->add_option(flag_name(key), a.counts[key]);
   }
   for (const char* key : {"lambda_sim", "lambda_dist", "learning_rate", "momentum", "grad_clip",
                           "noise_scale", "gradient_check_step"}) {
      sub->add_option(flag_name(key), a.reals[key]);
   }
   sub->add_option("--policy", a.strings["policy"])
      ->check(CLI::IsMember({"random_sphere", "random_plus_top_eig", "random_plus_bottom_eig"}));
   sub->add_option("--target-kind", a.strings["target_kind"])->check(CLI::IsMember({"rectified", "dense"}));
   sub->add_option("--hidden-rectified", a.hidden_rectified, "true or false");
   sub->add_option("--p", a.p, "target shape");
   sub->add_option("--mu", a.mu, "target location");
   sub->add_option("--sigma", a.sigma, "target scale");
   sub->add_option("--sigma-rule", a.sigma_rule)->check(CLI::IsMember({"gn", "rgn"}));
   sub->add_option("--config", a.config, "training config JSON")->check(CLI::ExistingFile);
   sub->add_option("--threads", a.threads)->check(CLI::PositiveNumber);
   sub->add_option("--trace", a.outputs["trace"], "wide trace CSV");
   sub->add_option("--tidy", a.outputs["tidy"], "long-format trace CSV (step,metric,value)");
   sub->add_option("--summary", a.outputs["summary"], "summary JSON");
   sub->add_option("--model", a.outputs["model"], "trained weights CSV");
}

json cmd_train(const TrainArgs& a)
{
   json j = a.config ? read_json(*a.config) : json::object();
   if (!j.is_object()) {
      throw ParseError(*a.config + ": expected a JSON object", 0);
   }
   json outputs = json::object();
   if (j.contains("outputs")) {
      outputs = j["outputs"];
      j.erase("outputs");
      if (!outputs.is_object()) {
         throw ParseError("\"outputs\" must be an object", 0);
      }
   }
   unsigned threads = 1;
   if (j.contains("threads")) {
      if (!j["threads"].is_number_unsigned() || j["threads"].get<unsigned>() == 0) {
         throw ParseError("\"threads\" must be a positive integer", 0);
      }
      threads = j["threads"].get<unsigned>();
      j.erase("threads");
   }
   if (a.threads) {
      threads = *a.threads;
   }

   for (const auto& [key, v] : a.counts) {
      if (v) {
         j[key] = *v;
      }
   }
   for (const auto& [key, v] : a.reals) {
      if (v) {
         j[key] = *v;
      }
   }
   for (const auto& [key, v] : a.strings) {
      if (v) {
         j[key] = *v;
      }
   }
   if (a.hidden_rectified) {
      j["hidden_rectified"] = *a.hidden_rectified;
   }
   if (a.p || a.mu || a.sigma || a.sigma_rule) {
      if (a.sigma && a.sigma_rule) {
         throw UsageError("give either --sigma or --sigma-rule, not both");
      }
      json& t = j["target"];
      if (t.is_null()) {
         t = json::object();
      }
      if (a.p) {
         t["p"] = *a.p;
      }
      if (a.mu) {
         t["mu"] = *a.mu;
      }
      if (a.sigma) {
         t["sigma"] = *a.sigma;
         t.erase("sigma_rule");
      }
      if (a.sigma_rule) {
         t["sigma_rule"] = *a.sigma_rule;
         t.erase("sigma");
      }
   }

   std::map<std::string, std::string> paths;
   for (const auto& [key, value] : outputs.items()) {
      if (a.outputs.count(key) == 0 || !value.is_string()) {
         throw ParseError("outputs: unknown key or non-string path \"" + key + "\"", 0);
      }
      paths[key] = value.get<std::string>();
   }
   for (const auto& [key, v] : a.outputs) {
      if (v) {
         paths[key] = *v;
      }
   }

   set_thread_count(threads);
   const TrainConfig config = train_config_from_json(j);
   const TrainResult result = train(config);

   json payload = train_summary(config, result);
   payload["command"] = "train";
   payload["threads"] = threads;
   payload["outputs"] = paths;
   if (auto it = paths.find("trace"); it != paths.end()) {
      write_file(it->second, [&](std::ostream& os) { write_trace_csv(os, result.trace); });
   }
   if (auto it = paths.find("tidy"); it != paths.end()) {
      write_file(it->second, [&](std::ostream& os) { write_trace_tidy_csv(os, result.trace); });
   }
   if (auto it = paths.find("model"); it != paths.end()) {
      write_file(it->second, [&](std::ostream& os) { save_model(os, result.model); });
   }
   if (auto it = paths.find("summary"); it != paths.end()) {
      write_file(it->second, [&](std::ostream& os) { os << payload.dump(2) << '\n'; });
   }
   return payload;
}

std::string describe(const ParseError& e)
{
   std::string msg = e.what();
   if (e.line() > 0 && msg.find("line " + std::to_string(e.line())) == std::string::npos) {
      msg += " (line " + std::to_string(e.line()) + ")";
   }
   return msg;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
   CLI::App app{"Rectified generalized Gaussian toolkit"};
   app.name("rggtool");
   app.require_subcommand(1);

   // Each subcommand registers its flags and a handler; the handler of the
   // one that was parsed runs after any config file has been merged in.
   std::map<CLI::App*, std::function<json()>> handlers;
   std::map<CLI::App*, Common*> commons;

   Common sample_common;
   SampleArgs sample_args;
   {
      auto* sub = app.add_subcommand("sample", "draw RGN samples to CSV");
      add_target_flags(sub, sample_args.target);
      sub->add_option("--n", sample_args.n, "rows");
      sub->add_option("--d", sample_args.d, "columns")->capture_default_str();
      sub->add_option("--seed", sample_args.seed)->capture_default_str();
      sub->add_option("--out", sample_args.out, "output CSV");
      add_common(sub, sample_common);
      handlers[sub] = [&] { return cmd_sample(sample_args); };
      commons[sub] = &sample_common;
   }

   Common predict_common;
   PredictArgs predict_args;
   {
      auto* sub = app.add_subcommand("predict-l0", "expected number of nonzero coordinates");
      add_target_flags(sub, predict_args.target);
      sub->add_option("--d", predict_args.d, "dimension")->capture_default_str();
      add_common(sub, predict_common);
      handlers[sub] = [&] { return cmd_predict_l0(predict_args); };
      commons[sub] = &predict_common;
   }

   Common moments_common;
   TargetFlags moments_target;
   {
      auto* sub = app.add_subcommand("moments", "closed-form RGN moments and zero mass");
      add_target_flags(sub, moments_target);
      add_common(sub, moments_common);
      handlers[sub] = [&] { return cmd_moments(moments_target); };
      commons[sub] = &moments_common;
   }

   Common entropy_common;
   EntropyArgs entropy_args;
   {
      auto* sub = app.add_subcommand("entropy", "per-column d-dimensional entropy of a CSV");
      sub->add_option("--in", entropy_args.in, "input CSV");
      sub->add_option("--m", entropy_args.m, "spacing (default ceil(sqrt(B')))");
      sub->add_option("--eps", entropy_args.eps, "zero threshold")->capture_default_str();
      add_common(sub, entropy_common);
      handlers[sub] = [&] { return cmd_entropy(entropy_args); };
      commons[sub] = &entropy_common;
   }

   Common rdmreg_common;
   RdmregArgs rdmreg_args;
   {
      auto* sub = app.add_subcommand("rdmreg", "sliced matching loss between two views and an RGN target");
      sub->add_option("--z", rdmreg_args.z, "first view CSV");
      sub->add_option("--zprime", rdmreg_args.zprime, "second view CSV");
      add_target_flags(sub, rdmreg_args.target);
      sub->add_option("--projections", rdmreg_args.projections)->capture_default_str();
      sub->add_option("--policy", rdmreg_args.policy)
         ->check(CLI::IsMember({"random_sphere", "random_plus_top_eig", "random_plus_bottom_eig"}))
         ->capture_default_str();
      sub->add_option("--eig-count", rdmreg_args.eig_count);
      sub->add_option("--seed", rdmreg_args.seed)->capture_default_str();
      sub->add_option("--lambda-sim", rdmreg_args.lambda_sim)->capture_default_str();
      sub->add_option("--lambda-dist", rdmreg_args.lambda_dist)->capture_default_str();
      add_common(sub, rdmreg_common);
      handlers[sub] = [&] { return cmd_rdmreg(rdmreg_args); };
      commons[sub] = &rdmreg_common;
   }

   Common hsic_common;
   HsicArgs hsic_args;
   {
      auto* sub = app.add_subcommand("hsic", "mean normalized HSIC over column pairs of a CSV");
      sub->add_option("--in", hsic_args.in, "input CSV");
      sub->add_option("--bandwidth-rule", hsic_args.rule)
         ->check(CLI::IsMember({"automatic", "median_pairwise", "positive_std"}))
         ->capture_default_str();
      sub->add_option("--bandwidth", hsic_args.bandwidth, "fixed kernel bandwidth");
      add_common(sub, hsic_common);
      handlers[sub] = [&] { return cmd_hsic(hsic_args); };
      commons[sub] = &hsic_common;
   }

   TrainArgs train_args;
   CLI::App* train_sub = app.add_subcommand("train", "train the toy encoder and write its trace");
   add_train_flags(train_sub, train_args);
   handlers[train_sub] = [&] { return cmd_train(train_args); };

   try {
      app.parse(argc, argv);
   } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
   }

   CLI::App* chosen = app.get_subcommands().front();
   try {
      if (auto it = commons.find(chosen); it != commons.end()) {
         if (it->second->config) {
            apply_config(*chosen, *it->second->config);
         }
         set_thread_count(it->second->threads);
      }
      const json payload = handlers.at(chosen)();
      out << payload.dump(2) << '\n';
      return exit_ok;
   } catch (const CLI::Error& e) {
      err << "error: " << e.what() << '\n';
      return exit_usage;
   } catch (const ParseError& e) {
      err << "error: " << describe(e) << '\n';
      return exit_usage;
   } catch (const UsageError& e) {
      err << "error: " << e.what() << '\n';
      return exit_usage;
   } catch (const std::invalid_argument& e) {
      // ShapeMismatch and DegenerateInput
      err << "error: " << e.what() << '\n';
      return exit_usage;
   } catch (const std::domain_error& e) {
      err << "error: " << e.what() << '\n';
      return exit_usage;
   } catch (const Divergence& e) {
      err << "error: diverged at step " << e.step() << ": " << e.what() << '\n';
      return exit_runtime;
   } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return exit_runtime;
   }
}

} // namespace rgg
