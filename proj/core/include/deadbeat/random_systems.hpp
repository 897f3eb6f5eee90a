#pragma once

#include <cstdint>
#include <random>

#include "deadbeat/linear_deadbeat.hpp"

namespace deadbeat {

using Rng = std::mt19937_64;

// Independent stream for run `index` of a batch seeded with `seed`.
Rng stream_for(std::uint64_t seed, std::uint64_t index);

Matrix gaussian_matrix(Rng& rng, int rows, int cols);
Vector uniform_vector(Rng& rng, int n, double lo, double hi);

// Haar-distributed orthogonal n x n matrix.
Matrix random_orthogonal(Rng& rng, int n);

// Gaussian (A, B) with A scaled by 1/sqrt(n), redrawn until the Krylov matrix
// [B AB … A^{n−1}B] has full rank with condition number below 1e8 and, when
// `invertible_A` is set, A is well conditioned.
LinearSystem random_controllable_pair(Rng& rng, int n, int m, bool invertible_A = true);

// Controllable pair whose A has exactly `rank` < n (rank >= n − m).
LinearSystem random_singular_controllable_pair(Rng& rng, int n, int m, int rank);

// Q [[A11 A12]; [0 A22]] Qᵀ with B = Q [B1; 0], Q orthogonal. The block A22
// (size n − r) carries the unreachable modes. With `zero_modes` set A22 is
// strictly upper triangular, so the pair stays deadbeat controllable;
// otherwise A22 has eigenvalues bounded away from zero and the pair is not.
LinearSystem random_kalman_split_pair(Rng& rng, int n, int m, int r, bool zero_modes);

}  // namespace deadbeat
