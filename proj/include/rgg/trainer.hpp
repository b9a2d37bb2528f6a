#ifndef RGG_TRAINER_HPP
#define RGG_TRAINER_HPP

#include "rgg/diagnostics.hpp"
#include "rgg/distributions.hpp"
#include "rgg/rng.hpp"
#include "rgg/sample_matrix.hpp"
#include "rgg/slicing.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rgg {

struct AffineLayer {
   Eigen::MatrixXd weight; // out x in
   Eigen::VectorXd bias;   // out
};

/**
 * One or two affine maps. The final map is followed by ReLU when
 * output_rectified is set (the default); the map between layers is followed
 * by ReLU when hidden_rectified is set.
 */
struct EncoderModel {
   std::vector<AffineLayer> layers;
   bool hidden_rectified = true;
   bool output_rectified = true;

   Eigen::Index input_dim() const { return layers.front().weight.cols(); }
   Eigen::Index output_dim() const { return layers.back().weight.rows(); }
   std::size_t parameter_count() const;
};

/// He-normal weights, zero biases. hidden_dim = 0 gives a single layer.
EncoderModel init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim,
                          bool hidden_rectified, Rng& rng);

/// Throws ShapeMismatch when x has the wrong width.
SampleMatrix forward(const EncoderModel& model, const SampleMatrix& x);

/// Same layout as EncoderModel, holding derivatives.
struct ModelGradient {
   std::vector<AffineLayer> layers;

   double squared_norm() const;
};

struct BackwardResult {
   LossBreakdown loss;
   ModelGradient grad;
};

/// Exact gradient of rdmreg_loss.total (frozen target sample y) with respect
/// to every weight and bias. Both views go through the same weights, so their
/// contributions add. ReLU gets derivative 0 at the kink and sort ties follow
/// the stable-sort order.
BackwardResult backward(const EncoderModel& model, const SampleMatrix& x, const SampleMatrix& xprime,
                        const SampleMatrix& y, const ProjectionSet& proj, double lambda_sim,
                        double lambda_dist);

/// As above with Y drawn from RGN(target) by Rng(seed), as rdmreg_loss does.
BackwardResult backward(const EncoderModel& model, const SampleMatrix& x, const SampleMatrix& xprime,
                        const RGGParams& target, const ProjectionSet& proj, double lambda_sim,
                        double lambda_dist, std::uint64_t seed);

struct GradientCheck {
   /// largest |analytic - numeric| / max(|analytic|, |numeric|) over checked coordinates
   double max_rel_error = 0.0;
   std::size_t checked = 0;
   /// coordinates whose +-h stencil crosses a ReLU kink or changes a sort order
   std::size_t skipped = 0;
   /// coordinates where both derivatives are below the noise floor
   std::size_t negligible = 0;
};

/**
 * Central-difference check of backward() at randomly drawn coordinates, until
 * `coordinates` of them have been checked or 20 times as many drawn.
 * A coordinate is skipped if any pre-activation changes sign or any projected
 * sort order changes between theta - h, theta and theta + h. Inside such a
 * region the loss is quadratic in a single coordinate, so the central
 * difference is exact up to rounding. Rounding alone contributes about
 * eps * |loss| / h, so pairs where both derivatives fall under
 * 1e-10 * (1 + |loss|) / h are counted as negligible rather than checked.
 */
GradientCheck check_gradient(const EncoderModel& model, const SampleMatrix& x, const SampleMatrix& xprime,
                             const SampleMatrix& y, const ProjectionSet& proj, double lambda_sim,
                             double lambda_dist, std::size_t coordinates, double h, Rng& rng);

/// Cluster centers of the synthetic view distribution.
struct SyntheticDataset {
   Eigen::MatrixXd centers; // clusters x input_dim
   double cluster_spread = 0.5;
};

inline constexpr std::uint64_t default_dataset_seed = 20240601;

/// Centers drawn as N(0, I); anchors are center + cluster_spread * N(0, I).
SyntheticDataset make_dataset(std::size_t input_dim, std::size_t clusters, std::uint64_t dataset_seed);

struct ViewPair {
   SampleMatrix x;
   SampleMatrix xprime;
};

/// n anchors from the mixture, each corrupted twice by independent
/// noise_scale * N(0, I) noise.
ViewPair generate_views(const SyntheticDataset& data, std::size_t n, double noise_scale, Rng& rng);
/// Uses make_dataset(input_dim, 4, default_dataset_seed).
ViewPair generate_views(std::size_t n, std::size_t input_dim, double noise_scale, std::uint64_t seed);

enum class TargetKind { rectified, dense };

struct TrainConfig {
   std::size_t input_dim = 8;
   std::size_t hidden_dim = 64;
   std::size_t feature_dim = 16;
   bool hidden_rectified = true;
   std::size_t batch = 256;
   std::size_t steps = 3000;
   double lambda_sim = default_lambda_sim;
   double lambda_dist = default_lambda_dist;
   /// target of the sliced term; defaults to RGN(1, 0, sigma_GN(1))
   RGGParams target{1.0, 0.0, sigma_gn(1.0)};
   /// dense trains against GN(target) with an unrectified output layer
   TargetKind target_kind = TargetKind::rectified;
   ProjectionPolicy policy = ProjectionPolicy::random_sphere;
   std::size_t projections = 512;
   std::optional<std::size_t> eig_count;
   double learning_rate = 0.01;
   double momentum = 0.9;
   std::size_t warmup_steps = 100;
   /// gradients with global L2 norm above this are rescaled to it; 0 disables
   double grad_clip = 10.0;
   std::uint64_t seed = 0;
   std::uint64_t dataset_seed = default_dataset_seed;
   std::size_t clusters = 4;
   double noise_scale = 0.1;
   std::size_t log_every = 100;
   std::size_t eval_samples = 1024;
   /// 0 disables the per-log-step finite-difference check
   std::size_t gradient_check_coordinates = 0;
   double gradient_check_step = 1e-6;

   /// Throws DomainError on a zero count, non-positive rate or invalid target.
   void validate() const;
};

/// Linear warmup to learning_rate, then cosine decay to 0 at the final step.
double learning_rate_at(const TrainConfig& config, std::size_t step);

struct TraceRecord {
   std::size_t step = 0;
   double learning_rate = 0.0;
   /// training loss on the batch used at this step
   LossBreakdown loss;
   /// the rest are evaluated on a fixed held-out set of eval_samples views
   SparsityReport sparsity;
   VcregDiagnostics vcreg;
   double sliced_stat = 0.0;
   Eigen::VectorXd feature_variance;
   std::optional<GradientCheck> gradient_check;
};

struct TrainTrace {
   std::vector<TraceRecord> records;
};

struct TrainResult {
   EncoderModel model;
   TrainTrace trace;
};

/**
 * SGD with momentum under the warmup + cosine schedule. Records are taken at
 * step 0 (before any update), every log_every updates, and after the last
 * update. Throws Divergence with the step index on a non-finite loss.
 */
TrainResult train(const TrainConfig& config);

/// Variance of one target coordinate, RGN or GN according to target_kind.
double target_variance(const TrainConfig& config);

struct PolicyComparison {
   TrainTrace random;
   TrainTrace eigen;
};

/// Trains config twice, with random_sphere and random_plus_bottom_eig; all
/// other settings, including the seed, are shared.
PolicyComparison compare_projection_policies(const TrainConfig& config);

/// Rows tensor,rows,cols,v0,v1,... with values row-major; flag rows for the
/// activation settings.
void save_model(std::ostream& out, const EncoderModel& model);
void save_model(const std::string& path, const EncoderModel& model);
EncoderModel load_model(std::istream& in);
EncoderModel load_model(const std::string& path);

/// Wide CSV, one row per record.
void write_trace_csv(std::ostream& out, const TrainTrace& trace);
/// Long CSV with columns step,metric,value.
void write_trace_tidy_csv(std::ostream& out, const TrainTrace& trace);

} // namespace rgg

#endif
