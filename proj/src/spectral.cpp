#include "casimir/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <future>
#include <mutex>
#include <sstream>

#include "casimir/detail/eigen.hpp"
#include "casimir/detail/thread_pool.hpp"

namespace casimir {
namespace detail {

namespace {
std::once_flag g_blas_env_once;

// The solver owns its parallelism (one block per task); a threaded BLAS
// underneath would oversubscribe the cores and make timings erratic.
void pin_blas_threads() {
    std::call_once(g_blas_env_once, [] {
        setenv("OPENBLAS_NUM_THREADS", "1", 0);
        setenv("OMP_NUM_THREADS", "1", 0);
    });
}
}  // namespace

std::vector<double> symmetric_eigenvalues(std::vector<double>& a, int n) {
    pin_blas_threads();
    std::vector<double> w(n);
    const lapack_int info =
        LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
    if (info != 0)
        throw NumericalError("symmetric eigensolver (dsyev) failed, info=" +
                             std::to_string(info));
    return w;
}

std::vector<double> symmetric_eigenvectors(std::vector<double>& a, int n) {
    pin_blas_threads();
    std::vector<double> w(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
    if (info != 0)
        throw NumericalError("symmetric eigensolver (dsyevd) failed, info=" +
                             std::to_string(info));
    return w;
}

}  // namespace detail

namespace spectral {

namespace {

// Blocks whose coupling is this small against the diagonal gaps go to the
// shift-tracking Jacobi path, which keeps the mode shifts relative-accurate.
constexpr double kShiftTrackMaxDominance = 3e-3;
constexpr int kShiftTrackMaxSize = 64;
// Tasks are dispatched in fixed waves of this many m-blocks so the adaptive
// m cutoff lands on the same block for every thread count.
constexpr int kWave = 16;
constexpr double kDegenerateGap = 1e-12;

std::string block_id(const coupling::CouplingBlock& b) {
    std::ostringstream os;
    os << "block m=" << b.m << ", l range [" << b.l_min << "," << b.l_max
       << "]";
    return os.str();
}

// Runs work(m) for m in [m_lo, m_hi] and feeds the results to consume in
// ascending m order; consume returning false stops the iteration. With a
// pool, blocks of one wave run in parallel but consumption order (and so
// every accumulated number) is identical to the serial schedule.
template <typename R>
void for_blocks_ordered(int m_lo, int m_hi, detail::ThreadPool* pool,
                        const std::function<R(int)>& work,
                        const std::function<bool(int, R&)>& consume) {
    if (!pool) {
        for (int m = m_lo; m <= m_hi; ++m) {
            R r = work(m);
            if (!consume(m, r)) return;
        }
        return;
    }
    for (int wave = m_lo; wave <= m_hi; wave += kWave) {
        const int wave_end = std::min(wave + kWave - 1, m_hi);
        std::vector<std::future<R>> futs;
        futs.reserve(wave_end - wave + 1);
        for (int m = wave; m <= wave_end; ++m)
            futs.push_back(pool->submit([&work, m] { return work(m); }));
        bool go = true;
        for (int m = wave; m <= wave_end; ++m) {
            R r = futs[m - wave].get();
            if (go && !consume(m, r)) go = false;
        }
        if (!go) return;
    }
}

}  // namespace

BlockModes solve_block(const coupling::CouplingBlock& block,
                       bool want_vectors) {
    const int n = block.size();
    BlockModes out;
    out.m = block.m;
    out.degeneracy = block.m == 0 ? 1 : 2;
    out.refs = block.refs;
    out.eigenvalues.resize(n);
    out.deltas.resize(n);

    if (n == 1) {
        // Trivial block: the shift is the coupling entry itself, exact.
        out.deltas[0] = block.coupling_at(0, 0);
        out.eigenvalues[0] = block.refs[0] + out.deltas[0];
        if (want_vectors) out.vectors = {1.0};
    } else if (n <= kShiftTrackMaxSize &&
               block.max_abs_coupling() <=
                   kShiftTrackMaxDominance * block.min_ref_gap()) {
        auto jr = detail::jacobi_delta_eigen<double>(block.refs, block.coupling,
                                                     n, want_vectors);
        out.eigenvalues = std::move(jr.values);
        out.deltas = std::move(jr.deltas);
        out.vectors = std::move(jr.vectors);
    } else {
        std::vector<double> h = block.coupling;
        for (int i = 0; i < n; ++i)
            h[static_cast<size_t>(i) * n + i] += block.refs[i];
        std::vector<double> w;
        try {
            w = want_vectors ? detail::symmetric_eigenvectors(h, n)
                             : detail::symmetric_eigenvalues(h, n);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " in " +
                                 block_id(block));
        }
        out.eigenvalues = std::move(w);
        for (int i = 0; i < n; ++i)
            out.deltas[i] = out.eigenvalues[i] - out.refs[i];
        if (want_vectors) out.vectors = std::move(h);
    }

    for (int i = 0; i < n; ++i) {
        const double v = out.eigenvalues[i];
        if (!(v > 0.0 && v < 1.0))
            throw NumericalError("eigenvalue " + std::to_string(v) +
                                 " outside (0,1) in " + block_id(block));
    }
    return out;
}

ModeSpectrum solve_spectrum(const model::Geometry& geom,
                            const model::SubstrateContrast& contrast,
                            const model::SolverConfig& cfg) {
    cfg.validate();
    const int m_hi = std::min(cfg.effective_m_max(), cfg.l_max);
    ModeSpectrum spec;
    spec.gap_over_radius = geom.gap_over_radius;
    spec.l_max_used = cfg.l_max;
    spec.m_max_used = m_hi;
    spec.per_m.resize(m_hi + 1);

    const int workers = cfg.effective_threads();
    std::optional<detail::ThreadPool> pool;
    if (workers > 1) pool.emplace(workers);

    for_blocks_ordered<BlockModes>(
        0, m_hi, pool ? &*pool : nullptr,
        [&](int m) {
            return solve_block(coupling::build_block(geom, contrast, m,
                                                     cfg.l_max),
                               false);
        },
        [&](int m, BlockModes& b) {
            spec.per_m[m] = std::move(b);
            return true;
        });
    return spec;
}

double green_function_element(const BlockModes& block, double u, int i, int j,
                              double pole_eps) {
    const int n = block.size();
    if (block.vectors.empty())
        throw ConfigError("green_function_element needs eigenvectors");
    if (i < 0 || j < 0 || i >= n || j >= n)
        throw ConfigError("green_function_element index out of range");
    double g = 0.0;
    for (int s = 0; s < n; ++s) {
        const double d = block.eigenvalues[s] - u;
        if (std::abs(d) < pole_eps)
            throw NumericalError(
                "spectral value within pole_eps of a proper mode");
        g += block.vectors[static_cast<size_t>(s) * n + i] *
             block.vectors[static_cast<size_t>(s) * n + j] / d;
    }
    return g;
}

namespace {

// Shared accumulation for the mode-shift sum. Each term is
// delta/(sqrt(n) + sqrt(ref)), the cancellation-free form of
// sqrt(n) - sqrt(ref).
struct EnergyAccumulator {
    explicit EnergyAccumulator(int l_max)
        : sum_by_l(static_cast<size_t>(l_max), 0.0) {}

    // Returns this block's (degeneracy-weighted) energy contribution.
    double add(const BlockModes& b, int l_min) {
        double de = 0.0;
        const double w = 0.5 * b.degeneracy;
        for (int s = 0; s < b.size(); ++s) {
            const double term =
                w * b.deltas[s] /
                (std::sqrt(b.eigenvalues[s]) + std::sqrt(b.refs[s]));
            de += term;
            sum_by_l[static_cast<size_t>(l_min + s) - 1] += term;
        }
        return de;
    }

    EnergyResult finish(double rel_tol) const {
        EnergyResult r;
        r.per_l_partials.resize(sum_by_l.size());
        double run = 0.0;
        for (size_t i = 0; i < sum_by_l.size(); ++i) {
            run += sum_by_l[i];
            r.per_l_partials[i] = run;
        }
        r.energy_reduced = run;
        const size_t L = sum_by_l.size();
        if (L >= 2 && sum_by_l[L - 2] != 0.0) {
            const double ratio =
                std::abs(sum_by_l[L - 1]) / std::abs(sum_by_l[L - 2]);
            r.est_truncation_error =
                ratio < 1.0 ? std::abs(sum_by_l[L - 1]) * ratio / (1.0 - ratio)
                            : std::abs(sum_by_l[L - 1]);
        } else {
            r.est_truncation_error = L ? std::abs(sum_by_l[L - 1]) : 0.0;
        }
        r.converged =
            r.est_truncation_error <= rel_tol * std::abs(r.energy_reduced);
        return r;
    }

    std::vector<double> sum_by_l;
};

FixedBasisEnergy energy_impl(const model::Geometry& geom,
                             const model::SubstrateContrast& contrast,
                             int l_max, int m_hi, bool adaptive_m, double tol,
                             detail::ThreadPool* pool) {
    EnergyAccumulator acc(l_max);
    double e_run = 0.0;
    double prev_abs = 0.0;
    int m_used = 0;

    for_blocks_ordered<BlockModes>(
        0, m_hi, pool,
        [&](int m) {
            return solve_block(coupling::build_block(geom, contrast, m, l_max),
                               false);
        },
        [&](int m, BlockModes& b) {
            const double de = acc.add(b, std::max(1, m));
            e_run += de;
            m_used = m;
            // Drop the remaining m sectors once their contribution is
            // negligible and still shrinking.
            const bool stop = adaptive_m && m >= 2 &&
                              std::abs(de) < 0.1 * tol * std::abs(e_run) &&
                              std::abs(de) <= prev_abs;
            prev_abs = std::abs(de);
            return !stop;
        });

    FixedBasisEnergy out;
    out.energy = acc.finish(tol);
    out.m_max_used = m_used;
    return out;
}

}  // namespace

EnergyResult zero_point_energy(const ModeSpectrum& spectrum,
                               const model::SolverConfig& cfg) {
    cfg.validate();
    EnergyAccumulator acc(spectrum.l_max_used);
    for (const BlockModes& b : spectrum.per_m) acc.add(b, std::max(1, b.m));
    return acc.finish(cfg.energy_rel_tol);
}

FixedBasisEnergy energy_at_l_max(const model::Geometry& geom,
                                 const model::SubstrateContrast& contrast,
                                 int l_max, const model::SolverConfig& cfg) {
    cfg.validate();
    const int m_hi = std::min(cfg.effective_m_max(), l_max);
    const int workers = cfg.effective_threads();
    std::optional<detail::ThreadPool> pool;
    if (workers > 1) pool.emplace(workers);
    return energy_impl(geom, contrast, l_max, m_hi, cfg.adaptive_truncation,
                       cfg.energy_rel_tol, pool ? &*pool : nullptr);
}

ConvergenceReport converge(const model::Geometry& geom,
                           const model::SubstrateContrast& contrast,
                           const model::SolverConfig& cfg,
                           bool throw_on_failure) {
    cfg.validate();
    const int cap = cfg.l_max;
    const double tol = cfg.energy_rel_tol;
    const int workers = cfg.effective_threads();
    std::optional<detail::ThreadPool> pool;
    if (workers > 1) pool.emplace(workers);

    ConvergenceReport rep;
    double prev_e = 0.0;
    FixedBasisEnergy last;
    int l = std::min(4, cap);
    for (;;) {
        const auto t0 = std::chrono::steady_clock::now();
        last = energy_impl(geom, contrast, l,
                           std::min(cfg.effective_m_max(), l),
                           cfg.adaptive_truncation, tol,
                           pool ? &*pool : nullptr);
        const std::chrono::duration<double> dt =
            std::chrono::steady_clock::now() - t0;

        ConvergenceStep step;
        step.l_max = l;
        step.energy = last.energy.energy_reduced;
        step.m_max_used = last.m_max_used;
        step.wall_seconds = dt.count();
        const bool have_pair = !rep.steps.empty();
        step.rel_delta =
            have_pair ? std::abs(step.energy - prev_e) /
                            std::max(std::abs(step.energy), 1e-300)
                      : 0.0;
        rep.steps.push_back(step);

        if (have_pair && step.rel_delta < tol) {
            rep.converged = true;
            break;
        }
        if (l >= cap) break;
        prev_e = step.energy;
        l = std::min(2 * l, cap);
    }

    rep.l_max_used = rep.steps.back().l_max;
    rep.m_max_used = rep.steps.back().m_max_used;
    rep.energy = last.energy;
    rep.energy.converged = rep.converged;
    if (rep.steps.size() >= 2) {
        const auto& s = rep.steps;
        rep.energy.est_truncation_error = std::abs(
            s[s.size() - 1].energy - s[s.size() - 2].energy);
    }
    if (!rep.converged && throw_on_failure) {
        std::ostringstream os;
        os << "energy not converged at l_max cap " << cap << " (tol " << tol
           << "): last partials";
        for (size_t i = rep.steps.size() >= 2 ? rep.steps.size() - 2 : 0;
             i < rep.steps.size(); ++i)
            os << " E(" << rep.steps[i].l_max << ")=" << rep.steps[i].energy;
        throw ConvergenceError(os.str());
    }
    return rep;
}

namespace {

// d(entry)/d(z/a) = entry * (-(l+l'+1)/(1+z/a)): every coupling entry is a
// pure power of x times a constant.
double hf_block_force(const coupling::CouplingBlock& block,
                      const BlockModes& modes, double dlnx_dzeta,
                      bool* near_degenerate) {
    const int n = block.size();
    double f = 0.0;
    std::vector<double> w(n);
    for (int s = 0; s < n; ++s) {
        const double* v = modes.vectors.data() + static_cast<size_t>(s) * n;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                const int p = (block.l_min + i) + (block.l_min + j) + 1;
                acc += block.coupling_at(i, j) * (p * dlnx_dzeta) * v[j];
            }
            w[i] = acc;
        }
        double dn = 0.0;
        for (int i = 0; i < n; ++i) dn += v[i] * w[i];
        f -= modes.degeneracy * dn / (4.0 * std::sqrt(modes.eigenvalues[s]));
        if (s > 0 &&
            modes.eigenvalues[s] - modes.eigenvalues[s - 1] < kDegenerateGap)
            *near_degenerate = true;
    }
    return f;
}

}  // namespace

ForceResult casimir_force(const model::Geometry& geom,
                          const model::SubstrateContrast& contrast,
                          const model::SolverConfig& cfg) {
    cfg.validate();
    int l_used = cfg.l_max;
    int m_used = std::min(cfg.effective_m_max(), cfg.l_max);
    if (cfg.adaptive_truncation) {
        const ConvergenceReport rep = converge(geom, contrast, cfg);
        l_used = rep.l_max_used;
        m_used = rep.m_max_used;
    }

    const int workers = cfg.effective_threads();
    std::optional<detail::ThreadPool> pool;
    if (workers > 1) pool.emplace(workers);

    ForceResult out;
    out.method = cfg.force_method;
    out.l_max_used = l_used;
    out.m_max_used = m_used;

    double f_hf = 0.0;
    if (cfg.force_method != model::ForceMethod::finite_difference) {
        const double dlnx = geom.dlnx_dzeta();
        struct BlockWork {
            coupling::CouplingBlock block;
            BlockModes modes;
        };
        for_blocks_ordered<BlockWork>(
            0, m_used, pool ? &*pool : nullptr,
            [&](int m) {
                BlockWork bw{coupling::build_block(geom, contrast, m, l_used),
                             {}};
                bw.modes = solve_block(bw.block, true);
                return bw;
            },
            [&](int, BlockWork& bw) {
                f_hf += hf_block_force(bw.block, bw.modes, dlnx,
                                       &out.near_degenerate);
                return true;
            });
    }

    double f_fd = 0.0;
    if (cfg.force_method != model::ForceMethod::hellmann_feynman) {
        // Same truncation basis on both sides of the difference: the step
        // must probe the smooth energy surface, not ladder jumps.
        const double zeta = geom.gap_over_radius;
        const double h = cfg.fd_step_rel;
        const auto ep = energy_impl(model::Geometry(zeta * (1.0 + h)),
                                    contrast, l_used, m_used, false,
                                    cfg.energy_rel_tol,
                                    pool ? &*pool : nullptr);
        const auto em = energy_impl(model::Geometry(zeta * (1.0 - h)),
                                    contrast, l_used, m_used, false,
                                    cfg.energy_rel_tol,
                                    pool ? &*pool : nullptr);
        f_fd = -(ep.energy.energy_reduced - em.energy.energy_reduced) /
               (2.0 * h * zeta);
    }

    switch (cfg.force_method) {
        case model::ForceMethod::hellmann_feynman:
            out.force_reduced = f_hf;
            break;
        case model::ForceMethod::finite_difference:
            out.force_reduced = f_fd;
            break;
        case model::ForceMethod::both:
            out.force_reduced = f_hf;
            out.hf_fd_discrepancy =
                std::abs(f_hf - f_fd) / std::max(std::abs(f_hf), 1e-300);
            break;
    }
    return out;
}

std::vector<std::pair<double, double>> local_exponent(
    const std::vector<std::pair<double, double>>& sweep) {
    if (sweep.size() < 3)
        throw ConfigError("local_exponent needs at least 3 sweep points");
    for (size_t i = 0; i < sweep.size(); ++i) {
        if (i > 0 && !(sweep[i].first > sweep[i - 1].first))
            throw ConfigError("local_exponent needs strictly increasing z/a");
        if (sweep[i].second == 0.0 ||
            (sweep[i].second > 0.0) != (sweep[0].second > 0.0))
            throw NumericalError(
                "force changes sign across the sweep; upstream bug");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(sweep.size() - 2);
    for (size_t i = 1; i + 1 < sweep.size(); ++i) {
        const double beta =
            -(std::log(std::abs(sweep[i + 1].second)) -
              std::log(std::abs(sweep[i - 1].second))) /
            (std::log(sweep[i + 1].first) - std::log(sweep[i - 1].first));
        out.emplace_back(sweep[i].first, beta);
    }
    return out;
}

}  // namespace spectral
}  // namespace casimir
