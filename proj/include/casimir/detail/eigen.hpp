#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "casimir/model.hpp"

namespace casimir::detail {

// Dense symmetric eigensolvers (LAPACK dsyev/dsyevd) on column-major storage.
// The input matrix is overwritten; with vectors, column s of the output holds
// the eigenvector of w[s]. Eigenvalues come back ascending.
std::vector<double> symmetric_eigenvalues(std::vector<double>& a, int n);
std::vector<double> symmetric_eigenvectors(std::vector<double>& a, int n);

template <typename T>
struct JacobiResult {
    std::vector<T> values;   // ascending
    std::vector<T> deltas;   // values[i] - refs[i], tracked not subtracted
    std::vector<T> vectors;  // column-major, empty unless requested
    bool reordered = false;  // eigenvalue order differed from slot order
    int sweeps = 0;
};

// Cyclic Jacobi for matrices of the form diag(refs) + coupling where the
// coupling is small against the diagonal gaps. The eigenvalue shifts away
// from refs are accumulated in a separate array, so they keep full relative
// precision even when they are far below the eigenvalues themselves; a plain
// eigensolve-then-subtract loses them to absolute roundoff at scale ||H||.
// Works for any scalar type with sqrt/abs (used at double in the solver and
// at 50-digit floats in the oracle).
template <typename T>
JacobiResult<T> jacobi_delta_eigen(const std::vector<T>& refs,
                                   std::vector<T> coupling, int n,
                                   bool want_vectors) {
    using std::abs;
    using std::sqrt;
    JacobiResult<T> out;
    out.deltas.resize(n);
    std::vector<T>& a = coupling;  // off-diagonal working copy
    for (int i = 0; i < n; ++i) {
        out.deltas[i] = a[static_cast<size_t>(i) * n + i];
        a[static_cast<size_t>(i) * n + i] = T(0);
    }
    if (want_vectors) {
        out.vectors.assign(static_cast<size_t>(n) * n, T(0));
        for (int i = 0; i < n; ++i)
            out.vectors[static_cast<size_t>(i) * n + i] = T(1);
    }

    auto off_max = [&]() {
        T v(0);
        for (int q = 1; q < n; ++q)
            for (int p = 0; p < q; ++p)
                v = std::max(v, abs(a[static_cast<size_t>(q) * n + p]));
        return v;
    };

    const T initial_off = off_max();
    const T stop_abs =
        initial_off * std::numeric_limits<T>::epsilon() * T(1) / T(100);
    T prev = initial_off;
    for (int sweep = 0; sweep < 60 && prev > T(0); ++sweep) {
        out.sweeps = sweep + 1;
        for (int q = 1; q < n; ++q) {
            for (int p = 0; p < q; ++p) {
                const T apq = a[static_cast<size_t>(q) * n + p];
                if (apq == T(0)) continue;
                const T gap =
                    (refs[q] - refs[p]) + (out.deltas[q] - out.deltas[p]);
                T t;
                if (gap == T(0)) {
                    t = T(1);
                } else {
                    const T tau = gap / (T(2) * apq);
                    t = (tau >= T(0) ? T(1) : T(-1)) /
                        (abs(tau) + sqrt(T(1) + tau * tau));
                }
                const T c = T(1) / sqrt(T(1) + t * t);
                const T s = t * c;
                out.deltas[p] -= t * apq;
                out.deltas[q] += t * apq;
                a[static_cast<size_t>(q) * n + p] = T(0);
                a[static_cast<size_t>(p) * n + q] = T(0);
                for (int r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    T& arp = a[static_cast<size_t>(p) * n + r];
                    T& arq = a[static_cast<size_t>(q) * n + r];
                    const T vrp = arp, vrq = arq;
                    arp = c * vrp - s * vrq;
                    arq = s * vrp + c * vrq;
                    a[static_cast<size_t>(r) * n + p] = arp;
                    a[static_cast<size_t>(r) * n + q] = arq;
                }
                if (want_vectors) {
                    for (int r = 0; r < n; ++r) {
                        T& vrp = out.vectors[static_cast<size_t>(p) * n + r];
                        T& vrq = out.vectors[static_cast<size_t>(q) * n + r];
                        const T tp = vrp, tq = vrq;
                        vrp = c * tp - s * tq;
                        vrq = s * tp + c * tq;
                    }
                }
            }
        }
        const T cur = off_max();
        if (cur <= stop_abs || cur >= prev) break;
        prev = cur;
    }

    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = refs[i] + out.deltas[i];

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return out.values[i] < out.values[j]; });
    for (int i = 0; i < n; ++i) {
        if (order[i] != i) {
            out.reordered = true;
            break;
        }
    }
    if (out.reordered) {
        // A level crossing happened: rank pairing replaces slot pairing, and
        // the tracked deltas no longer line up, so recompute them directly.
        JacobiResult<T> sorted;
        sorted.reordered = true;
        sorted.sweeps = out.sweeps;
        sorted.values.resize(n);
        sorted.deltas.resize(n);
        if (want_vectors)
            sorted.vectors.resize(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i) {
            sorted.values[i] = out.values[order[i]];
            sorted.deltas[i] = sorted.values[i] - refs[i];
            if (want_vectors)
                std::copy_n(out.vectors.begin() +
                                static_cast<size_t>(order[i]) * n,
                            n,
                            sorted.vectors.begin() + static_cast<size_t>(i) * n);
        }
        return sorted;
    }
    return out;
}

}  // namespace casimir::detail
