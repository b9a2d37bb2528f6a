#include "rgg/train_json.hpp"

#include "rgg/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace rgg {

namespace {

using nlohmann::json;

template <typename T>
T field(const json& j, const char* key)
{
   try {
      return j.at(key).get<T>();
   } catch (const json::exception& e) {
      throw ParseError(std::string("train config: bad value for \"") + key + "\": " + e.what(), 0);
   }
}

std::size_t count_field(const json& j, const char* key)
{
   const json& v = j.at(key);
   if (v.is_number_unsigned()) {
      return v.get<std::size_t>();
   }
   if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ParseError(std::string("train config: \"") + key + "\" must be a non-negative integer", 0);
   }
   return v.get<std::size_t>();
}

RGGParams target_from_json(const json& t)
{
   if (!t.is_object()) {
      throw ParseError("train config: \"target\" must be an object", 0);
   }
   for (const auto& [key, value] : t.items()) {
      if (key != "p" && key != "mu" && key != "sigma" && key != "sigma_rule") {
         throw ParseError("train config: unknown target key \"" + key + "\"", 0);
      }
   }
   RGGParams params{1.0, 0.0, 1.0};
   if (t.contains("p")) {
      params.p = field<double>(t, "p");
   }
   if (t.contains("mu")) {
      params.mu = field<double>(t, "mu");
   }
   if (t.contains("sigma") && t.contains("sigma_rule")) {
      throw ParseError("train config: give either target.sigma or target.sigma_rule", 0);
   }
   if (t.contains("sigma")) {
      params.sigma = field<double>(t, "sigma");
      return params;
   }
   const std::string rule = t.contains("sigma_rule") ? field<std::string>(t, "sigma_rule") : "gn";
   if (rule == "gn") {
      params.sigma = sigma_gn(params.p);
   } else if (rule == "rgn") {
      params.sigma = sigma_rgn(params.p, params.mu).sigma;
   } else {
      throw ParseError("train config: sigma_rule must be \"gn\" or \"rgn\"", 0);
   }
   return params;
}

} // namespace

TrainConfig train_config_from_json(const json& j)
{
   if (!j.is_object()) {
      throw ParseError("train config: expected a JSON object", 0);
   }
   static const std::set<std::string> known{
      "input_dim",   "hidden_dim",   "feature_dim",  "hidden_rectified", "batch",
      "steps",       "lambda_sim",   "lambda_dist",  "target",           "target_kind",
      "policy",      "projections",  "eig_count",    "learning_rate",    "momentum",
      "warmup_steps", "grad_clip",   "seed",         "dataset_seed",     "clusters",
      "noise_scale", "log_every",    "eval_samples", "gradient_check_coordinates",
      "gradient_check_step"};
   for (const auto& [key, value] : j.items()) {
      if (known.count(key) == 0) {
         throw ParseError("train config: unknown key \"" + key + "\"", 0);
      }
   }

   TrainConfig c;
   auto count = [&](const char* key, std::size_t& out) {
      if (j.contains(key)) {
         out = count_field(j, key);
      }
   };
   auto real = [&](const char* key, double& out) {
      if (j.contains(key)) {
         out = field<double>(j, key);
      }
   };
   count("input_dim", c.input_dim);
   count("hidden_dim", c.hidden_dim);
   count("feature_dim", c.feature_dim);
   count("batch", c.batch);
   count("steps", c.steps);
   count("projections", c.projections);
   count("warmup_steps", c.warmup_steps);
   count("clusters", c.clusters);
   count("log_every", c.log_every);
   count("eval_samples", c.eval_samples);
   count("gradient_check_coordinates", c.gradient_check_coordinates);
   real("lambda_sim", c.lambda_sim);
   real("lambda_dist", c.lambda_dist);
   real("learning_rate", c.learning_rate);
   real("momentum", c.momentum);
   real("grad_clip", c.grad_clip);
   real("noise_scale", c.noise_scale);
   real("gradient_check_step", c.gradient_check_step);
   if (j.contains("hidden_rectified")) {
      c.hidden_rectified = field<bool>(j, "hidden_rectified");
   }
   if (j.contains("seed")) {
      c.seed = count_field(j, "seed");
   }
   if (j.contains("dataset_seed")) {
      c.dataset_seed = count_field(j, "dataset_seed");
   }
   if (j.contains("eig_count") && !j.at("eig_count").is_null()) {
      c.eig_count = count_field(j, "eig_count");
   }
   if (j.contains("target")) {
      c.target = target_from_json(j.at("target"));
   }
   if (j.contains("target_kind")) {
      const auto kind = field<std::string>(j, "target_kind");
      if (kind == "rectified") {
         c.target_kind = TargetKind::rectified;
      } else if (kind == "dense") {
         c.target_kind = TargetKind::dense;
      } else {
         throw ParseError("train config: target_kind must be \"rectified\" or \"dense\"", 0);
      }
   }
   if (j.contains("policy")) {
      c.policy = parse_projection_policy(field<std::string>(j, "policy"));
   }
   c.validate();
   return c;
}

TrainConfig load_train_config(const std::string& path)
{
   std::ifstream in(path);
   if (!in) {
      throw ParseError("cannot open " + path, 0);
   }
   json j;
   try {
      j = json::parse(in);
   } catch (const json::parse_error& e) {
      throw ParseError(path + ": " + e.what(), 0);
   }
   return train_config_from_json(j);
}

json to_json(const TrainConfig& c)
{
   return json{
      {"input_dim", c.input_dim},
      {"hidden_dim", c.hidden_dim},
      {"feature_dim", c.feature_dim},
      {"hidden_rectified", c.hidden_rectified},
      {"batch", c.batch},
      {"steps", c.steps},
      {"lambda_sim", c.lambda_sim},
      {"lambda_dist", c.lambda_dist},
      {"target", {{"p", c.target.p}, {"mu", c.target.mu}, {"sigma", c.target.sigma}}},
      {"target_kind", c.target_kind == TargetKind::dense ? "dense" : "rectified"},
      {"policy", to_string(c.policy)},
      {"projections", c.projections},
      {"eig_count", c.eig_count ? json(*c.eig_count) : json(nullptr)},
      {"learning_rate", c.learning_rate},
      {"momentum", c.momentum},
      {"warmup_steps", c.warmup_steps},
      {"grad_clip", c.grad_clip},
      {"seed", c.seed},
      {"dataset_seed", c.dataset_seed},
      {"clusters", c.clusters},
      {"noise_scale", c.noise_scale},
      {"log_every", c.log_every},
      {"eval_samples", c.eval_samples},
      {"gradient_check_coordinates", c.gradient_check_coordinates},
      {"gradient_check_step", c.gradient_check_step},
   };
}

namespace {

json number_or_null(double v)
{
   return std::isfinite(v) ? json(v) : json(nullptr);
}

} // namespace

json to_json(const TraceRecord& r)
{
   json j{
      {"step", r.step},
      {"learning_rate", r.learning_rate},
      {"loss",
       {{"invariance", number_or_null(r.loss.invariance)},
        {"rdmreg_view1", number_or_null(r.loss.rdmreg_view1)},
        {"rdmreg_view2", number_or_null(r.loss.rdmreg_view2)},
        {"total", number_or_null(r.loss.total)}}},
      {"m_l1", r.sparsity.m_l1 ? json(*r.sparsity.m_l1) : json(nullptr)},
      {"m_l0", r.sparsity.m_l0},
      {"zero_fraction", r.sparsity.zero_fraction},
      {"all_zero_rows", r.sparsity.all_zero_rows},
      {"variance_loss", number_or_null(r.vcreg.variance_loss)},
      {"covariance_loss", number_or_null(r.vcreg.covariance_loss)},
      {"sliced_stat", number_or_null(r.sliced_stat)},
   };
   json variances = json::array();
   for (Eigen::Index i = 0; i < r.feature_variance.size(); ++i) {
      variances.push_back(number_or_null(r.feature_variance(i)));
   }
   j["feature_variance"] = variances;
   if (r.gradient_check) {
      j["gradient_check"] = {{"max_rel_error", r.gradient_check->max_rel_error},
                             {"checked", r.gradient_check->checked},
                             {"skipped", r.gradient_check->skipped},
                             {"negligible", r.gradient_check->negligible}};
   }
   return j;
}

json train_summary(const TrainConfig& config, const TrainResult& result)
{
   json j{{"config", to_json(config)}, {"records", result.trace.records.size()}};
   if (!result.trace.records.empty()) {
      j["final"] = to_json(result.trace.records.back());
   }
   j["target_variance"] = target_variance(config);
   if (config.target_kind == TargetKind::rectified) {
      j["predicted_m_l0"] = nonzero_probability(config.target);
   }
   return j;
}

} // namespace rgg
