#pragma once

#include <cstdint>
#include <random>

namespace nlspde {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// One independent stream per (master seed, path id, substream). Streams are
// derived, never shared between callers.
struct RngStream {
  std::uint64_t master = 0, path = 0, substream = 0;
  std::mt19937_64 engine;
  std::normal_distribution<double> gauss{0.0, 1.0};
  std::uniform_real_distribution<double> unif{0.0, 1.0};

  RngStream(std::uint64_t master_seed, std::uint64_t path_id, std::uint64_t sub = 0)
      : master(master_seed), path(path_id), substream(sub),
        engine(splitmix64(master_seed ^ splitmix64(path_id * 0x632be59bd9b4e019ULL + sub))) {}

  double normal() { return gauss(engine); }
  // open interval (0, 1)
  double uniform() {
    double u;
    do u = unif(engine);
    while (u == 0.0);
    return u;
  }
};

}  // namespace nlspde
