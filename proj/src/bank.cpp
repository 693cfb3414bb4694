#include "mams/bank.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "mams/parallel.hpp"
#include "mams/rng.hpp"

namespace mams {

std::uint64_t BankConfig::total_deviates() const {
  return replicates * static_cast<std::uint64_t>(arms + 1) *
         static_cast<std::uint64_t>(stages) * static_cast<std::uint64_t>(n_max);
}

void BankConfig::validate() const {
  if (replicates < 1) throw std::invalid_argument("bank: replicates must be >= 1");
  if (arms < 1) throw std::invalid_argument("bank: arms (K) must be >= 1");
  if (stages < 1) throw std::invalid_argument("bank: stages (J) must be >= 1");
  if (n_max < 2) {
    throw std::invalid_argument(
        "bank: n_max must be >= 2 (pooled variance needs residual degrees of freedom)");
  }
  if (mode == BankMode::Stored && stored_bytes() > memory_budget_bytes) {
    throw std::runtime_error(
        "bank: stored size " + std::to_string(stored_bytes() >> 20) +
        " MiB exceeds the memory budget of " + std::to_string(memory_budget_bytes >> 20) +
        " MiB; reduce n_max/replicates or switch to the lean (on-the-fly) bank mode");
  }
}

bool BankConfig::operator==(const BankConfig& o) const {
  return replicates == o.replicates && arms == o.arms && stages == o.stages &&
         n_max == o.n_max && seed == o.seed;
}

std::uint64_t ResponseBank::substream_of(std::uint64_t r, int k) const {
  return r * static_cast<std::uint64_t>(cfg_.arms + 1) + static_cast<std::uint64_t>(k);
}

ResponseBank ResponseBank::build(const BankConfig& config, int threads) {
  config.validate();
  ResponseBank bank(config);
  if (config.mode == BankMode::Lean) return bank;

  const std::uint64_t block = static_cast<std::uint64_t>(config.stages) * config.n_max;
  const int total_arms = config.arms + 1;
  bank.data_.resize(config.total_deviates());
  parallel_chunks(config.replicates, threads, 256,
                  [&](std::uint64_t, std::uint64_t rb, std::uint64_t re) {
                    for (std::uint64_t r = rb; r < re; ++r) {
                      for (int k = 0; k < total_arms; ++k) {
                        RngStream s{config.seed, bank.substream_of(r, k), 0};
                        double* out = bank.data_.data() + (r * total_arms + k) * block;
                        draw_std_normal(s, block, out);
                      }
                    }
                  });
  return bank;
}

double ResponseBank::deviate(std::uint64_t r, int k, int j, int i) const {
  const std::uint64_t idx = static_cast<std::uint64_t>(j) * cfg_.n_max + i;
  if (cfg_.mode == BankMode::Stored) {
    const std::uint64_t block = static_cast<std::uint64_t>(cfg_.stages) * cfg_.n_max;
    return data_[(r * (cfg_.arms + 1) + k) * block + idx];
  }
  return RngStream{cfg_.seed, substream_of(r, k), 0}.at(idx);
}

void ResponseBank::fill_arm_block(std::uint64_t r, int k, double* out) const {
  const std::uint64_t block = static_cast<std::uint64_t>(cfg_.stages) * cfg_.n_max;
  if (cfg_.mode == BankMode::Stored) {
    std::memcpy(out, data_.data() + (r * (cfg_.arms + 1) + k) * block,
                block * sizeof(double));
    return;
  }
  RngStream s{cfg_.seed, substream_of(r, k), 0};
  draw_std_normal(s, block, out);
}

const double* ResponseBank::arm_block_ptr(std::uint64_t r, int k) const {
  if (cfg_.mode != BankMode::Stored) return nullptr;
  const std::uint64_t block = static_cast<std::uint64_t>(cfg_.stages) * cfg_.n_max;
  return data_.data() + (r * (cfg_.arms + 1) + k) * block;
}

RealizedResponses ResponseBank::realize(std::uint64_t r, int n, const EffectVector& theta,
                                        double sigma_true) const {
  if (n < 1 || n > cfg_.n_max) {
    throw std::invalid_argument("realize: group size " + std::to_string(n) +
                                " exceeds bank capacity n_max=" + std::to_string(cfg_.n_max));
  }
  if (r >= cfg_.replicates) {
    throw std::invalid_argument("realize: replicate index out of range");
  }
  if (static_cast<int>(theta.size()) != cfg_.arms) {
    throw std::invalid_argument("realize: effect vector size must equal K");
  }
  if (!(sigma_true > 0.0)) {
    throw std::invalid_argument("realize: sigma_true must be positive");
  }

  RealizedResponses out;
  out.arms = cfg_.arms;
  out.stages = cfg_.stages;
  out.n = n;
  out.values.resize(static_cast<std::size_t>(cfg_.arms + 1) * cfg_.stages * n);

  std::vector<double> block(static_cast<std::size_t>(cfg_.stages) * cfg_.n_max);
  for (int k = 0; k <= cfg_.arms; ++k) {
    const double shift = k == 0 ? 0.0 : theta[k - 1];
    const double* src = arm_block_ptr(r, k);
    if (src == nullptr) {
      fill_arm_block(r, k, block.data());
      src = block.data();
    }
    for (int j = 0; j < cfg_.stages; ++j) {
      for (int i = 0; i < n; ++i) {
        out.at(k, j, i) = shift + sigma_true * src[static_cast<std::size_t>(j) * cfg_.n_max + i];
      }
    }
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'M', 'A', 'M', 'S', 'B', 'N', 'K', '1'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void require_little_endian() {
  if constexpr (std::endian::native != std::endian::little) {
    throw std::runtime_error("bank dump: only little-endian hosts are supported");
  }
}

template <typename T>
void write_pod(std::FILE* f, const T& v) {
  if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("bank dump: write failed");
}

template <typename T>
void read_pod(std::FILE* f, T& v) {
  if (std::fread(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("bank load: read failed");
}

}  // namespace

void ResponseBank::dump(const std::string& path) const {
  require_little_endian();
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("bank dump: cannot open " + path);
  if (std::fwrite(kMagic, 1, sizeof(kMagic), f.get()) != sizeof(kMagic)) {
    throw std::runtime_error("bank dump: write failed");
  }
  write_pod(f.get(), static_cast<std::uint32_t>(1));  // version
  write_pod(f.get(), cfg_.replicates);
  write_pod(f.get(), static_cast<std::uint32_t>(cfg_.arms));
  write_pod(f.get(), static_cast<std::uint32_t>(cfg_.stages));
  write_pod(f.get(), static_cast<std::uint32_t>(cfg_.n_max));
  write_pod(f.get(), cfg_.seed);

  const std::uint64_t block = static_cast<std::uint64_t>(cfg_.stages) * cfg_.n_max;
  std::vector<double> buf(block);
  for (std::uint64_t r = 0; r < cfg_.replicates; ++r) {
    for (int k = 0; k <= cfg_.arms; ++k) {
      fill_arm_block(r, k, buf.data());
      if (std::fwrite(buf.data(), sizeof(double), block, f.get()) != block) {
        throw std::runtime_error("bank dump: write failed");
      }
    }
  }
}

ResponseBank ResponseBank::load(const std::string& path) {
  require_little_endian();
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("bank load: cannot open " + path);
  char magic[8];
  if (std::fread(magic, 1, sizeof(magic), f.get()) != sizeof(magic) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("bank load: bad magic in " + path);
  }
  std::uint32_t version = 0;
  read_pod(f.get(), version);
  if (version != 1) throw std::runtime_error("bank load: unsupported version");

  BankConfig cfg;
  std::uint32_t arms = 0, stages = 0, n_max = 0;
  read_pod(f.get(), cfg.replicates);
  read_pod(f.get(), arms);
  read_pod(f.get(), stages);
  read_pod(f.get(), n_max);
  read_pod(f.get(), cfg.seed);
  cfg.arms = static_cast<int>(arms);
  cfg.stages = static_cast<int>(stages);
  cfg.n_max = static_cast<int>(n_max);
  cfg.mode = BankMode::Stored;
  cfg.validate();

  ResponseBank bank(cfg);
  bank.data_.resize(cfg.total_deviates());
  if (std::fread(bank.data_.data(), sizeof(double), bank.data_.size(), f.get()) !=
      bank.data_.size()) {
    throw std::runtime_error("bank load: truncated payload in " + path);
  }
  return bank;
}

}  // namespace mams
