#include "ace/mc_bounds.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ace::mc {

std::string to_string(AtuMode mode) {
  return mode == AtuMode::BoundInterval ? "interval" : "point";
}

std::optional<AtuMode> atu_mode_from_string(const std::string& text) {
  if (text == "interval") return AtuMode::BoundInterval;
  if (text == "point") return AtuMode::LatentPoint;
  return std::nullopt;
}

Split sample_split(std::int64_t n_ww, rng::Xoshiro256& gen) {
  if (n_ww < 0) throw std::invalid_argument("negative wrong-to-wrong count");
  if (n_ww == 0) return {0, 0, 0};
  // Two distinct bar positions among n_ww + 2 slots pick one composition.
  const auto slots = static_cast<std::uint64_t>(n_ww) + 2;
  std::uint64_t a = gen.below(slots) + 1;
  std::uint64_t b = gen.below(slots) + 1;
  while (b == a) b = gen.below(slots) + 1;
  if (a > b) std::swap(a, b);
  return {static_cast<std::int64_t>(a - 1), static_cast<std::int64_t>(b - a - 1),
          static_cast<std::int64_t>(slots - b)};
}

namespace {

void split_range(std::int64_t count, std::span<std::int64_t> out, std::size_t lo,
                 std::size_t hi, rng::Xoshiro256& gen) {
  if (count == 0) return;
  if (hi - lo == 1) {
    out[lo] = count;
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  const double p_left = static_cast<double>(mid - lo) / static_cast<double>(hi - lo);
  const std::int64_t left = rng::binomial(gen, count, p_left);
  split_range(left, out, lo, mid, gen);
  split_range(count - left, out, mid, hi, gen);
}

struct Accumulator {
  double att_min = std::numeric_limits<double>::infinity();
  double att_max = -std::numeric_limits<double>::infinity();
  double atu_lo_min = std::numeric_limits<double>::infinity();
  double atu_hi_max = -std::numeric_limits<double>::infinity();
  double ate_min = std::numeric_limits<double>::infinity();
  double ate_max = -std::numeric_limits<double>::infinity();
  std::uint64_t items_skipped = 0;
  std::uint64_t atu_items_skipped = 0;
  std::uint64_t att_undefined = 0;
  std::uint64_t atu_undefined = 0;

  void merge(const Accumulator& o) {
    att_min = std::min(att_min, o.att_min);
    att_max = std::max(att_max, o.att_max);
    atu_lo_min = std::min(atu_lo_min, o.atu_lo_min);
    atu_hi_max = std::max(atu_hi_max, o.atu_hi_max);
    ate_min = std::min(ate_min, o.ate_min);
    ate_max = std::max(ate_max, o.ate_max);
    items_skipped += o.items_skipped;
    atu_items_skipped += o.atu_items_skipped;
    att_undefined += o.att_undefined;
    atu_undefined += o.atu_undefined;
  }
};

}  // namespace

void allocate(std::int64_t count, std::span<std::int64_t> out, rng::Xoshiro256& gen) {
  if (out.empty()) throw std::invalid_argument("allocate needs at least one item");
  if (count < 0) throw std::invalid_argument("negative allocation count");
  std::fill(out.begin(), out.end(), std::int64_t{0});
  split_range(count, out, 0, out.size(), gen);
}

SimResult simulate(const ingest::CollapsedTally& tally, const SimConfig& config) {
  ingest::validate(tally);
  if (config.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (config.parallel_width < 1) throw std::invalid_argument("parallel width must be >= 1");
  if (tally.n_ww + tally.n_wr + tally.n_rw == 0) {
    throw std::invalid_argument(
        "nothing to simulate: no changers and no wrong-to-wrong mass");
  }

  const auto items = static_cast<std::size_t>(tally.n_items);
  const double pooled_total =
      static_cast<double>(tally.n_examinees) * static_cast<double>(tally.n_items);
  const bool interval_mode = config.atu_mode == AtuMode::BoundInterval;

  auto run_range = [&](std::uint64_t first, std::uint64_t last, Accumulator& acc) {
    std::vector<std::int64_t> buffer(6 * items);
    const std::span<std::int64_t> ww1(buffer.data(), items);
    const std::span<std::int64_t> ww2(buffer.data() + items, items);
    const std::span<std::int64_t> ww3(buffer.data() + 2 * items, items);
    const std::span<std::int64_t> wr(buffer.data() + 3 * items, items);
    const std::span<std::int64_t> rw(buffer.data() + 4 * items, items);
    const std::span<std::int64_t> rr(buffer.data() + 5 * items, items);

    for (std::uint64_t iter = first; iter < last; ++iter) {
      rng::Xoshiro256 gen = rng::substream(config.seed, iter);
      const Split split = sample_split(tally.n_ww, gen);
      allocate(split.ww1, ww1, gen);
      allocate(split.ww2, ww2, gen);
      allocate(split.ww3, ww3, gen);
      allocate(tally.n_wr, wr, gen);
      allocate(tally.n_rw, rw, gen);
      allocate(tally.n_rr, rr, gen);

      double att_sum = 0.0;
      std::int64_t att_n = 0;
      double atu_lo_sum = 0.0;
      double atu_hi_sum = 0.0;
      std::int64_t atu_n = 0;
      for (std::size_t j = 0; j < items; ++j) {
        const std::int64_t att_den = ww3[j] + wr[j] + rw[j];
        if (att_den == 0) {
          ++acc.items_skipped;
        } else {
          att_sum += static_cast<double>(wr[j] - rw[j]) / static_cast<double>(att_den);
          ++att_n;
        }
        const std::int64_t atu_den = ww1[j] + ww2[j] + rr[j];
        if (atu_den == 0) {
          ++acc.atu_items_skipped;
        } else if (interval_mode) {
          atu_lo_sum += static_cast<double>(-rr[j]) / static_cast<double>(atu_den);
          atu_hi_sum +=
              static_cast<double>(ww1[j] + ww2[j] - rr[j]) / static_cast<double>(atu_den);
          ++atu_n;
        } else {
          const double point =
              static_cast<double>(ww1[j] - rr[j]) / static_cast<double>(atu_den);
          atu_lo_sum += point;
          atu_hi_sum += point;
          ++atu_n;
        }
      }

      IterationStats stats{};
      stats.iteration = iter;
      stats.ww1 = split.ww1;
      stats.ww2 = split.ww2;
      stats.ww3 = split.ww3;
      if (att_n > 0) {
        const double att = att_sum / static_cast<double>(att_n);
        acc.att_min = std::min(acc.att_min, att);
        acc.att_max = std::max(acc.att_max, att);
        stats.att_defined = true;
        stats.att = att;
      } else {
        ++acc.att_undefined;
      }
      if (atu_n > 0) {
        const double lo = atu_lo_sum / static_cast<double>(atu_n);
        const double hi = atu_hi_sum / static_cast<double>(atu_n);
        acc.atu_lo_min = std::min(acc.atu_lo_min, lo);
        acc.atu_hi_max = std::max(acc.atu_hi_max, hi);
        stats.atu_defined = true;
        stats.atu_lower = lo;
        stats.atu_upper = hi;
      } else {
        ++acc.atu_undefined;
      }
      const double ate =
          static_cast<double>(split.ww1 + tally.n_wr - tally.n_rw - tally.n_rr) /
          pooled_total;
      acc.ate_min = std::min(acc.ate_min, ate);
      acc.ate_max = std::max(acc.ate_max, ate);
      stats.ate = ate;
      if (config.observer && *config.observer) (*config.observer)(stats);
    }
  };

  const auto width = static_cast<std::uint64_t>(
      config.observer ? 1 : std::min<std::int64_t>(config.parallel_width,
                                                   static_cast<std::int64_t>(config.iterations)));
  Accumulator total;
  if (width <= 1) {
    run_range(0, config.iterations, total);
  } else {
    std::vector<Accumulator> partial(width);
    std::vector<std::thread> workers;
    workers.reserve(width);
    const std::uint64_t chunk = config.iterations / width;
    const std::uint64_t rest = config.iterations % width;
    std::uint64_t start = 0;
    for (std::uint64_t w = 0; w < width; ++w) {
      const std::uint64_t size = chunk + (w < rest ? 1 : 0);
      workers.emplace_back(run_range, start, start + size, std::ref(partial[w]));
      start += size;
    }
    for (auto& worker : workers) worker.join();
    for (const auto& p : partial) total.merge(p);
  }

  SimResult result;
  result.iterations_run = config.iterations;
  result.items_skipped_total = total.items_skipped;
  result.atu_items_skipped_total = total.atu_items_skipped;
  result.att_undefined_iterations = total.att_undefined;
  result.atu_undefined_iterations = total.atu_undefined;
  result.seed = config.seed;
  result.atu_mode = config.atu_mode;
  if (total.att_min <= total.att_max) {
    result.att_interval = MinMax{total.att_min, total.att_max};
  }
  if (total.atu_lo_min <= total.atu_hi_max) {
    result.atu_interval = MinMax{total.atu_lo_min, total.atu_hi_max};
  }
  result.ate_interval = MinMax{total.ate_min, total.ate_max};
  return result;
}

}  // namespace ace::mc
