#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mams {

// Treatment effect vector theta = (theta_1..theta_K): mean response of each
// experimental arm minus the control mean.
using EffectVector = std::vector<double>;

enum class BankMode {
  Stored,  // all deviates materialized in memory
  Lean,    // regenerated on demand from the counter-based generator
};

struct BankConfig {
  std::uint64_t replicates = 100000;  // R
  int arms = 1;                       // K experimental arms (total arms = K+1)
  int stages = 1;                     // J
  int n_max = 2;                      // per-arm per-stage capacity
  std::uint64_t seed = 0;
  BankMode mode = BankMode::Stored;
  std::uint64_t memory_budget_bytes = 6ULL << 30;

  std::uint64_t total_deviates() const;
  std::uint64_t stored_bytes() const { return total_deviates() * sizeof(double); }
  void validate() const;  // throws std::invalid_argument / std::runtime_error
  bool operator==(const BankConfig& other) const;
};

// Responses of one simulated trial dataset: x(k, j, i) for arm k = 0..K
// (0 = control), stage j = 0..J-1, patient i = 0..n-1.
struct RealizedResponses {
  int arms = 0;    // K
  int stages = 0;  // J
  int n = 0;
  std::vector<double> values;

  double at(int k, int j, int i) const {
    return values[(static_cast<std::size_t>(k) * stages + j) * n + i];
  }
  double& at(int k, int j, int i) {
    return values[(static_cast<std::size_t>(k) * stages + j) * n + i];
  }
};

// The common-random-number bank: R x (K+1) x J x n_max standard normal
// deviates, fully determined by its config. Immutable once built; safe for
// concurrent reads.
class ResponseBank {
 public:
  static ResponseBank build(const BankConfig& config, int threads = 1);

  const BankConfig& config() const { return cfg_; }
  BankMode mode() const { return cfg_.mode; }

  // Raw deviate Z for (replicate, arm, stage, patient); identical in both
  // storage modes.
  double deviate(std::uint64_t r, int k, int j, int i) const;

  // Copies the J*n_max deviates of one (replicate, arm) block into out,
  // laid out stage-major: out[j*n_max + i].
  void fill_arm_block(std::uint64_t r, int k, double* out) const;

  // In stored mode, a direct pointer to the block above (null in lean mode).
  const double* arm_block_ptr(std::uint64_t r, int k) const;

  // X_kji = theta_k (0 for control) + sigma_true * Z_kji, using the first n
  // deviates of every (arm, stage) block. Throws if n > n_max or r >= R.
  RealizedResponses realize(std::uint64_t r, int n, const EffectVector& theta,
                            double sigma_true) const;

  // Versioned binary dump for cross-run caching (little-endian doubles in
  // [r][k][j][i] order).
  void dump(const std::string& path) const;
  static ResponseBank load(const std::string& path);

 private:
  explicit ResponseBank(BankConfig cfg) : cfg_(cfg) {}
  std::uint64_t substream_of(std::uint64_t r, int k) const;

  BankConfig cfg_;
  std::vector<double> data_;  // empty in lean mode
};

}  // namespace mams
