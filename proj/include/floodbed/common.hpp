// Shared vocabulary: simulation time, error types, seeded randomness.
#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace floodbed {

// All timestamps are offsets from the start of a run, in microseconds.
// Virtual time in sim mode, scaled wall time in live mode.
using SimTime = std::chrono::microseconds;

using namespace std::chrono_literals;

inline double to_seconds(SimTime t) { return static_cast<double>(t.count()) * 1e-6; }
inline double to_millis(SimTime t) { return static_cast<double>(t.count()) * 1e-3; }
SimTime from_seconds(double s);

/// Invalid configuration; carries the dotted path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Seeded generator. The uniform draw is built from raw bits so that the
// stream is identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Child stream for an independent component.
  Rng fork(std::uint64_t salt);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace floodbed
