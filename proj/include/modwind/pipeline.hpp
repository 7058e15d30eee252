#pragma once

// Sharded enumeration of Pi_A(N) on a worker pool. Each shard owns its
// accumulator; results are merged in shard order after all workers join,
// so every output is independent of the thread count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "modwind/invariants.hpp"
#include "modwind/necklace.hpp"
#include "modwind/stats.hpp"

namespace modwind {

// Candidate words visited by an exhaustive run: sum of A^n over even n <= N.
inline double enumeration_work(int A, int N) {
  double work = 0.0;
  for (int n = 2; n <= N; n += 2) work += std::pow(double(A), n);
  return work;
}

inline constexpr double kExhaustiveWorkCap = 1e9;

// Runs task(i) for i in [0, count) on up to `threads` workers. The first
// exception thrown by any task is rethrown on the caller's thread.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

struct RunOptions {
  int A = 2;
  int N = 2;
  unsigned threads = 1;
  HistogramConfig hist;
  std::size_t shard_depth = 2;
  std::uint64_t cross_check_every = 1024;
  // called with the number of finished shards
  std::function<void(std::size_t, std::size_t)> progress;
};

struct RunResult {
  JointCounts counts;
  RecordBuilder checks;
};

inline void require_cover_depth(std::size_t depth) {
  if (depth > 2) throw DomainError("shard depth must be <= 2 so that period-2 necklaces are covered");
}

inline RunResult run_exhaustive(const RunOptions& opts) {
  require_cover_depth(opts.shard_depth);
  const auto shards = shard_cover(opts.A, opts.shard_depth);
  std::vector<JointCounts> partial(shards.size(), JointCounts(opts.A, opts.N, opts.hist));
  std::vector<RecordBuilder> builders(shards.size(), RecordBuilder(opts.cross_check_every));
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(shards.size(), opts.threads, [&](std::size_t i) {
    JointCounts& acc = partial[i];
    RecordBuilder& build = builders[i];
    enumerate(opts.A, opts.N, shards[i], [&](std::span<const Digit> rep) { acc.add(build(rep)); });
    const std::size_t finished = ++done;
    if (opts.progress) {
      std::lock_guard lock(progress_mutex);
      opts.progress(finished, shards.size());
    }
  });
  RunResult result{JointCounts(opts.A, opts.N, opts.hist), RecordBuilder(opts.cross_check_every)};
  for (std::size_t i = 0; i < shards.size(); ++i) {
    result.counts.merge(partial[i]);
    result.checks.merge(builders[i]);
  }
  return result;
}

// pi_A(N) by direct enumeration.
inline mpz_class count_by_enumeration(int A, int N, unsigned threads = 1, std::size_t depth = 2) {
  require_cover_depth(depth);
  const auto shards = shard_cover(A, depth);
  std::vector<std::uint64_t> counts(shards.size(), 0);
  parallel_for(shards.size(), threads, [&](std::size_t i) {
    std::uint64_t c = 0;
    enumerate(A, N, shards[i], [&](std::span<const Digit>) { ++c; });
    counts[i] = c;
  });
  mpz_class total = 0;
  for (auto c : counts) total += mpz_class(std::to_string(c));
  return total;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::size_t kSampleChunks = 64;

// Monte Carlo substitute for run_exhaustive: `samples` necklaces drawn
// uniformly from Pi_A(N) (length by exact |P_n| weights, then uniform in
// P_n). Work is split into a fixed number of seeded chunks.
inline RunResult run_sampled(const RunOptions& opts, std::uint64_t samples, std::uint64_t seed) {
  require_bound(opts.A);
  require_even_bound(opts.N);
  std::vector<double> weights;
  for (int n = 2; n <= opts.N; n += 2) weights.push_back(count_Pn(opts.A, n).get_d());
  std::vector<JointCounts> partial(kSampleChunks, JointCounts(opts.A, opts.N, opts.hist));
  std::vector<RecordBuilder> builders(kSampleChunks, RecordBuilder(opts.cross_check_every));
  parallel_for(kSampleChunks, opts.threads, [&](std::size_t chunk) {
    const std::uint64_t quota = samples / kSampleChunks + (chunk < samples % kSampleChunks ? 1 : 0);
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(chunk)));
    std::discrete_distribution<int> length(weights.begin(), weights.end());
    for (std::uint64_t s = 0; s < quota; ++s) {
      const std::size_t n = 2 * std::size_t(length(rng) + 1);
      const Necklace necklace = sample_uniform(opts.A, n, rng);
      partial[chunk].add(builders[chunk](necklace.rep()));
    }
  });
  RunResult result{JointCounts(opts.A, opts.N, opts.hist), RecordBuilder(opts.cross_check_every)};
  for (std::size_t i = 0; i < kSampleChunks; ++i) {
    result.counts.merge(partial[i]);
    result.checks.merge(builders[i]);
  }
  return result;
}

}  // namespace modwind
