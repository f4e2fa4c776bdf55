#include "casimir/coupling.hpp"

#include <cmath>
#include <mutex>
#include <ostream>
#include <utility>

#include "casimir/detail/format.hpp"

namespace casimir::coupling {

namespace {

// log(n!) table, grown on demand and shared. Kahan accumulation keeps the
// absolute error near machine epsilon times the final value instead of
// drifting with the number of terms.
class LogFactorialTable {
  public:
    // Value good for indices up to `need`; returns a pointer stable for the
    // lifetime of the program.
    const double* ensure(int need) {
        std::lock_guard<std::mutex> lock(mu_);
        if (static_cast<int>(table_.size()) <= need) grow(need);
        return table_.data();
    }

  private:
    void grow(int need) {
        size_t old = table_.size();
        if (old == 0) {
            table_.push_back(0.0);  // log 0! = 0
            sum_ = 0.0;
            comp_ = 0.0;
            old = 1;
        }
        table_.resize(static_cast<size_t>(need) + 1);
        for (size_t k = old; k <= static_cast<size_t>(need); ++k) {
            const double term = std::log(static_cast<double>(k)) - comp_;
            const double next = sum_ + term;
            comp_ = (next - sum_) - term;
            sum_ = next;
            table_[k] = sum_;
        }
    }

    std::mutex mu_;
    std::vector<double> table_;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

LogFactorialTable g_log_factorial;

}  // namespace

LogCoupling log_coupling_coefficient(int l, int lp, int m) {
    const int am = m < 0 ? -m : m;
    if (l < 1 || lp < 1 || l < am || lp < am)
        throw ConfigError("coupling coefficient needs l, l' >= max(1, |m|)");
    // canonical order so the swap symmetry holds bit for bit
    if (lp < l) std::swap(l, lp);
    const double* lf = g_log_factorial.ensure(l + lp);
    const double log_mag =
        0.5 * (std::log(static_cast<double>(l)) +
               std::log(static_cast<double>(lp)) -
               std::log(2.0 * l + 1.0) - std::log(2.0 * lp + 1.0)) +
        lf[l + lp] -
        0.5 * (lf[l + am] + lf[l - am] + lf[lp + am] + lf[lp - am]);
    const double sign = ((l + lp) % 2 == 0) ? 1.0 : -1.0;
    return {log_mag, sign};
}

double coupling_term(int l, int lp, int m, double ln_x) {
    const LogCoupling c = log_coupling_coefficient(l, lp, m);
    return c.sign * std::exp(c.log_magnitude + (l + lp + 1) * ln_x);
}

double CouplingBlock::max_abs_coupling() const {
    double v = 0.0;
    for (double c : coupling) v = std::max(v, std::abs(c));
    return v;
}

double CouplingBlock::min_ref_gap() const {
    if (refs.size() < 2) return 1.0;
    double g = 1.0;
    for (size_t i = 1; i < refs.size(); ++i)
        g = std::min(g, refs[i] - refs[i - 1]);
    return g;
}

CouplingBlock build_block(const model::Geometry& geom,
                          const model::SubstrateContrast& contrast,
                          int m, int l_max) {
    if (m < 0) throw ConfigError("block index m must be >= 0");
    if (m > l_max)
        throw ConfigError("block index m exceeds l_max");
    const double x = geom.x();
    if (!std::isfinite(x) || !(x > 0.0 && x < 0.5))
        throw ConfigError("geometric ratio x out of range");

    CouplingBlock block;
    block.m = m;
    block.l_min = std::max(1, m);
    block.l_max = l_max;
    block.x = x;
    const int n = block.size();
    block.refs.resize(n);
    block.coupling.assign(static_cast<size_t>(n) * n, 0.0);

    const double ln_x = std::log(x);
    const double fc = contrast.f_c;
    for (int i = 0; i < n; ++i)
        block.refs[i] = isolated_sphere_eigenvalue(block.l_min + i);
    // One evaluation per (l, l') pair, mirrored: symmetry is exact by
    // construction.
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) {
            const double v =
                fc * coupling_term(block.l_min + i, block.l_min + j, m, ln_x);
            block.coupling[static_cast<size_t>(j) * n + i] = v;
            block.coupling[static_cast<size_t>(i) * n + j] = v;
        }
    }
    return block;
}

void write_block_csv(const CouplingBlock& block, std::ostream& os) {
    os << "l,l_prime,entry\n";
    for (int l = block.l_min; l <= block.l_max; ++l)
        for (int lp = block.l_min; lp <= block.l_max; ++lp)
            os << l << ',' << lp << ',' << detail::format_double(block.entry(l, lp))
               << '\n';
}

}  // namespace casimir::coupling
