#pragma once

#include <vector>

// Every default the CLI and the studies fall back to when a config omits a key.
//
//   key                        default
//   grid_n                     256 (d=1), 64 (d=2), 16 (d=3)
//   radius                     24 (d=1), 12 (d=2), 6 (d=3)
//   tail_tol                   1e-10
//   fock_cap                   12 sites
//   im_z                       0.5
//   one_particle_L             2 4 8 16 32 64 128
//   many_body_L                1 2 3 4 5
//   maxent.tol                 1e-8
//   maxent.max_iter            5000
//   maxent.site_counts         1 2 3
//   maxent.perturbed_states    100
//   maxent.seed                20240601
//   maxent.max_sites           7   (converge fills maxent_gap up to this size)
//   regularity_stability       1e-8 (grid-doubling check in check-symbol)
namespace fermitherm::defaults {

inline constexpr int kFockCap = 12;
inline constexpr double kTailTol = 1e-10;
inline constexpr double kImZ = 0.5;
inline constexpr double kMaxEntTol = 1e-8;
inline constexpr int kMaxEntMaxIter = 5000;
inline constexpr int kPerturbedStates = 100;
inline constexpr unsigned long long kSeed = 20240601ULL;
inline constexpr int kMaxEntMaxSites = 7;
inline constexpr double kRegularityStability = 1e-8;

inline int grid_n(int dimension) {
  switch (dimension) {
    case 1: return 256;
    case 2: return 64;
    default: return 16;
  }
}

inline int radius(int dimension) {
  switch (dimension) {
    case 1: return 24;
    case 2: return 12;
    default: return 6;
  }
}

inline std::vector<int> one_particle_L() { return {2, 4, 8, 16, 32, 64, 128}; }
inline std::vector<int> many_body_L() { return {1, 2, 3, 4, 5}; }
inline std::vector<int> maxent_site_counts() { return {1, 2, 3}; }

}  // namespace fermitherm::defaults
