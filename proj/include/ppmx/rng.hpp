#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ppmx {

// Counter-free deterministic RNG with explicit stream splitting.  All samplers
// are hand-rolled so that draws are reproducible bit-for-bit across platforms
// and independent of standard-library implementation details.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream derived from a master seed and a stream id.
  static Rng stream(std::uint64_t master, std::uint64_t stream_id);

  std::uint64_t next_u64();

  double uniform();  // (0,1)
  double normal();   // Box-Muller, no cached spare
  double exponential(double mean);
  // Gamma(shape, scale); Marsaglia-Tsang with the small-shape boost
  double gamma(double shape, double scale = 1.0);
  // log of a Gamma(shape, 1) draw, stable for shapes down to ~1e-300
  double log_gamma_draw(double shape);
  double chisq(double df);
  double beta(double a, double b);
  double half_cauchy();  // |Cauchy(0,1)|
  double gumbel();

  int uniform_int(int n);  // {0, ..., n-1}

  // index of max(logw_i + Gumbel_i); tolerates -inf entries
  int categorical_log(std::span<const double> logw);

  Eigen::VectorXd normal_vector(int k);
  // draw from N(mean, (scale * precision)^-1)
  Eigen::VectorXd mvn_precision(const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision,
                                double scale = 1.0);
  // Wishart with density |L|^((df-K-1)/2) exp(-tr(S^-1 L)/2), mean df*S
  Eigen::MatrixXd wishart(const Eigen::MatrixXd& scale, double df);

 private:
  std::uint64_t s_[4];
};

}  // namespace ppmx
