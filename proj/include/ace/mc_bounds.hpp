#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

#include "ace/ingest.hpp"
#include "ace/rng.hpp"

namespace ace::mc {

/// How the per-item ATU is tracked inside the simulation.
///   BoundInterval: average the per-item ATU bound endpoints given the
///     iteration's wrong-to-wrong-changed allocation (default; its minimum
///     can reach -1 when the whole wrong-to-wrong mass is changed).
///   LatentPoint: average per-item ATU points computed from the drawn
///     latent split itself (never reaches -1 while any retained
///     wrong-to-wrong unit has a wrong potential treatment outcome).
enum class AtuMode { BoundInterval, LatentPoint };

std::string to_string(AtuMode mode);
std::optional<AtuMode> atu_mode_from_string(const std::string& text);

struct IterationStats {
  std::uint64_t iteration;
  std::int64_t ww1, ww2, ww3;
  bool att_defined;
  double att;
  bool atu_defined;
  double atu_lower, atu_upper;
  double ate;
};

/// Test-only hook; forces single-threaded execution when set.
using IterationObserver = std::function<void(const IterationStats&)>;

struct SimConfig {
  std::uint64_t iterations = 1'000'000;
  std::uint64_t seed = 1;
  AtuMode atu_mode = AtuMode::BoundInterval;
  int parallel_width = 1;  // execution hint only; results never depend on it
  const IterationObserver* observer = nullptr;
};

struct MinMax {
  double min;
  double max;
};

struct SimResult {
  std::optional<MinMax> att_interval;
  std::optional<MinMax> atu_interval;
  MinMax ate_interval{0.0, 0.0};  // pooled per-iteration ATE, diagnostic
  std::uint64_t iterations_run = 0;
  std::uint64_t items_skipped_total = 0;       // items without changers
  std::uint64_t atu_items_skipped_total = 0;   // items without control units
  std::uint64_t att_undefined_iterations = 0;
  std::uint64_t atu_undefined_iterations = 0;
  std::uint64_t seed = 0;
  AtuMode atu_mode = AtuMode::BoundInterval;
};

struct Split {
  std::int64_t ww1;
  std::int64_t ww2;
  std::int64_t ww3;
};

/// Uniformly random composition of n_ww into three nonnegative parts
/// (every lattice composition equally likely, by two distinct cut points).
Split sample_split(std::int64_t n_ww, rng::Xoshiro256& gen);

/// Drop `count` records uniformly and independently onto out.size() items
/// (equal-cell multinomial). Implemented by recursive binomial splitting,
/// so cost grows with the number of items rather than the count.
void allocate(std::int64_t count, std::span<std::int64_t> out, rng::Xoshiro256& gen);

/// Monte Carlo search over latent wrong-to-wrong splits.
///
/// Each iteration (an indexed substream of the master seed):
///   1. split the pooled wrong-to-wrong count into (ww1, ww2, ww3);
///   2. allocate all six latent classes across the items uniformly;
///   3. average per-item ATT points (items without changers are skipped
///      and counted) and per-item ATU values per the configured mode;
///   4. fold the test-level values into running minima and maxima.
/// The reduction is commutative and associative, so any parallel width
/// produces bit-identical results for the same (tally, iterations, seed,
/// atu_mode).
SimResult simulate(const ingest::CollapsedTally& tally, const SimConfig& config);

}  // namespace ace::mc
