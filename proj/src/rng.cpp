#include "ppmx/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "ppmx/mathutil.hpp"

namespace ppmx {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) w = splitmix64(x);
}

Rng Rng::stream(std::uint64_t master, std::uint64_t stream_id) {
  std::uint64_t x = master;
  std::uint64_t a = splitmix64(x);
  x = a ^ (0xD1B54A32D192ED03ULL * (stream_id + 1));
  return Rng(splitmix64(x));
}

std::uint64_t Rng::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::exponential(double mean) { return -mean * std::log(uniform()); }

double Rng::gamma(double shape, double scale) {
  return std::exp(log_gamma_draw(shape)) * scale;
}

double Rng::log_gamma_draw(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("log_gamma_draw: shape must be positive");
  if (shape < 1.0) {
    // boost: G_a = G_{a+1} * U^{1/a}, done on the log scale
    return log_gamma_draw(shape + 1.0) + std::log(uniform()) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d) + std::log(v);
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d) + std::log(v);
  }
}

double Rng::chisq(double df) { return gamma(0.5 * df, 2.0); }

double Rng::beta(double a, double b) {
  double lx = log_gamma_draw(a);
  double ly = log_gamma_draw(b);
  return std::exp(lx - log_add_exp(lx, ly));
}

double Rng::half_cauchy() { return std::tan(0.5 * M_PI * uniform()); }

double Rng::gumbel() { return -std::log(-std::log(uniform())); }

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  const std::uint64_t bound = ~0ULL - ~0ULL % static_cast<std::uint64_t>(n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x > bound);
  return static_cast<int>(x % static_cast<std::uint64_t>(n));
}

int Rng::categorical_log(std::span<const double> logw) {
  if (logw.empty()) throw std::invalid_argument("categorical_log: empty weights");
  int best = -1;
  double best_val = neg_inf;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    if (logw[i] == neg_inf) continue;
    double val = logw[i] + gumbel();
    if (val > best_val) {
      best_val = val;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw std::runtime_error("categorical_log: all weights are -inf");
  return best;
}

Eigen::VectorXd Rng::normal_vector(int k) {
  Eigen::VectorXd z(k);
  for (int i = 0; i < k; ++i) z(i) = normal();
  return z;
}

Eigen::VectorXd Rng::mvn_precision(const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision,
                                   double scale) {
  Eigen::MatrixXd prec = scale * precision;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mvn_precision: precision not positive definite");
  Eigen::VectorXd z = normal_vector(static_cast<int>(mean.size()));
  // cov = (L L^T)^-1  =>  x = mean + L^-T z
  return mean + llt.matrixU().solve(z);
}

Eigen::MatrixXd Rng::wishart(const Eigen::MatrixXd& scale, double df) {
  const int k = static_cast<int>(scale.rows());
  if (df <= k - 1) throw std::invalid_argument("wishart: df too small");
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("wishart: scale not positive definite");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    a(i, i) = std::sqrt(chisq(df - i));
    for (int j = 0; j < i; ++j) a(i, j) = normal();
  }
  Eigen::MatrixXd la = llt.matrixL() * a;
  return la * la.transpose();
}

}  // namespace ppmx
