#include "casimir/run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "casimir/detail/format.hpp"
#include "casimir/detail/thread_pool.hpp"
#include "casimir/reference.hpp"

namespace casimir::run {

namespace fs = std::filesystem;

std::string curve_name(Curve c) {
    switch (c) {
        case Curve::full: return "full";
        case Curve::dipole: return "dipole";
        case Curve::quadrupole: return "quadrupole";
        case Curve::proximity_vdw: return "proximity_vdw";
        case Curve::proximity_ideal: return "proximity_ideal";
    }
    return "unknown";
}

Curve curve_from_name(const std::string& name) {
    if (name == "full") return Curve::full;
    if (name == "dipole") return Curve::dipole;
    if (name == "quadrupole") return Curve::quadrupole;
    if (name == "proximity" || name == "proximity_vdw")
        return Curve::proximity_vdw;
    if (name == "proximity_ideal") return Curve::proximity_ideal;
    throw ConfigError("unknown curve '" + name +
                      "' (use full, dipole, quadrupole, proximity, "
                      "proximity_ideal)");
}

namespace {

std::string curve_label(Curve c) {
    switch (c) {
        case Curve::full: return "full multipolar";
        case Curve::dipole: return "dipole model";
        case Curve::quadrupole: return "quadrupole model";
        case Curve::proximity_vdw: return "proximity 1/z^3";
        case Curve::proximity_ideal: return "proximity 1/z^2";
    }
    return "?";
}

std::vector<double> make_grid(double lo, double hi, int n, Spacing spacing) {
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        g[i] = spacing == Spacing::log
                   ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                   : lo + t * (hi - lo);
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::string method_name(model::ForceMethod m) {
    switch (m) {
        case model::ForceMethod::hellmann_feynman: return "hf";
        case model::ForceMethod::finite_difference: return "fd";
        case model::ForceMethod::both: return "both";
    }
    return "?";
}

// ---- SVG chart writer -------------------------------------------------

struct Series {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> pts;  // already abs'd for log axes
};

std::string fmt_px(double v) {
    return detail::format_double(std::round(v * 100.0) / 100.0);
}

std::string fmt_label(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

double nice_step(double span, int target) {
    const double raw = span / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double mult = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
    return mult * mag;
}

void write_chart(std::ostream& os, const std::string& title,
                 const std::string& x_label, const std::string& y_label,
                 bool log_x, bool log_y, const std::vector<Series>& series) {
    const double W = 760, H = 500;
    const double ml = 76, mr = 22, mt = 44, mb = 58;
    const double pw = W - ml - mr, ph = H - mt - mb;

    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return false;
        if (log_x && !(x > 0.0)) return false;
        if (log_y && !(y > 0.0)) return false;
        return true;
    };

    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    bool any = false;
    for (const auto& s : series)
        for (const auto& [px, py] : s.pts) {
            if (!usable(px, py)) continue;
            const double ux = tx(px), uy = ty(py);
            if (!any) {
                x0 = x1 = ux;
                y0 = y1 = uy;
                any = true;
            } else {
                x0 = std::min(x0, ux);
                x1 = std::max(x1, ux);
                y0 = std::min(y0, uy);
                y1 = std::max(y1, uy);
            }
        }

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\">\n"
       << "<rect width=\"" << W << "\" height=\"" << H
       << "\" fill=\"#ffffff\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-size=\"15\" fill=\"#222\">"
       << title << "</text>\n";
    if (!any) {
        os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2
           << "\" text-anchor=\"middle\" fill=\"#666\">no plottable data"
              "</text>\n</svg>\n";
        return;
    }
    if (x1 - x0 < 1e-12) { x0 -= 1.0; x1 += 1.0; }
    if (y1 - y0 < 1e-12) { y0 -= 1.0; y1 += 1.0; }
    const double xpad = 0.02 * (x1 - x0), ypad = 0.04 * (y1 - y0);
    x0 -= xpad; x1 += xpad; y0 -= ypad; y1 += ypad;

    auto sx = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
    auto sy = [&](double v) { return mt + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    // Tick positions in transformed units.
    auto ticks_for = [&](double lo, double hi, bool is_log) {
        std::vector<double> t;  // value in data units
        if (is_log) {
            const int klo = static_cast<int>(std::ceil(lo - 1e-9));
            const int khi = static_cast<int>(std::floor(hi + 1e-9));
            int step = 1 + (khi - klo) / 12;
            for (int k = klo; k <= khi; k += step)
                t.push_back(std::pow(10.0, k));
        } else {
            const double step = nice_step(hi - lo, 5);
            for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step;
                 v += step)
                t.push_back(v);
        }
        return t;
    };

    for (double v : ticks_for(x0, x1, log_x)) {
        const double px = ml + (((log_x ? std::log10(v) : v) - x0) /
                                (x1 - x0)) * pw;
        os << "<line x1=\"" << fmt_px(px) << "\" y1=\"" << mt << "\" x2=\""
           << fmt_px(px) << "\" y2=\"" << mt + ph
           << "\" stroke=\"#dddddd\"/>\n"
           << "<text x=\"" << fmt_px(px) << "\" y=\"" << mt + ph + 18
           << "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#333\">"
           << fmt_label(v) << "</text>\n";
    }
    for (double v : ticks_for(y0, y1, log_y)) {
        const double py = mt + ph - (((log_y ? std::log10(v) : v) - y0) /
                                     (y1 - y0)) * ph;
        os << "<line x1=\"" << ml << "\" y1=\"" << fmt_px(py) << "\" x2=\""
           << ml + pw << "\" y2=\"" << fmt_px(py)
           << "\" stroke=\"#dddddd\"/>\n"
           << "<text x=\"" << ml - 8 << "\" y=\"" << fmt_px(py + 4)
           << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#333\">"
           << fmt_label(v) << "</text>\n";
    }
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
       << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444444\"/>\n"
       << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 14
       << "\" text-anchor=\"middle\" font-size=\"13\" fill=\"#222\">"
       << x_label << "</text>\n"
       << "<text x=\"20\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-size=\"13\" fill=\"#222\" "
          "transform=\"rotate(-90 20 "
       << mt + ph / 2 << ")\">" << y_label << "</text>\n";

    for (const auto& s : series) {
        std::string seg;
        int seg_count = 0;
        auto flush = [&]() {
            if (seg_count >= 2)
                os << "<polyline fill=\"none\" stroke=\"" << s.color
                   << "\" stroke-width=\"1.8\" points=\"" << seg << "\"/>\n";
            seg.clear();
            seg_count = 0;
        };
        for (const auto& [px, py] : s.pts) {
            if (!usable(px, py)) {
                flush();
                continue;
            }
            if (!seg.empty()) seg += ' ';
            seg += fmt_px(sx(px));
            seg += ',';
            seg += fmt_px(sy(py));
            ++seg_count;
        }
        flush();
    }

    double ly = mt + 16;
    for (const auto& s : series) {
        const double lx = ml + pw - 190;
        os << "<line x1=\"" << lx << "\" y1=\"" << fmt_px(ly - 4)
           << "\" x2=\"" << lx + 26 << "\" y2=\"" << fmt_px(ly - 4)
           << "\" stroke=\"" << s.color << "\" stroke-width=\"2.5\"/>\n"
           << "<text x=\"" << lx + 32 << "\" y=\"" << fmt_px(ly)
           << "\" font-size=\"12\" fill=\"#222\">" << s.label << "</text>\n";
        ly += 18;
    }
    os << "</svg>\n";
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e"};

// ---- CSV --------------------------------------------------------------

void write_sweep_csv(std::ostream& os, const RunConfig& cfg,
                     const SweepCurve& curve, bool with_beta) {
    os << "# sphere-plane dispersion interaction sweep\n"
       << "# curve: " << curve.label << "\n"
       << "# f_c: " << detail::format_double(cfg.contrast.f_c) << "\n"
       << "# grid: " << cfg.points << " points in ["
       << detail::format_double(cfg.z_min) << ", "
       << detail::format_double(cfg.z_max) << "], "
       << (cfg.spacing == Spacing::log ? "log" : "linear") << " spacing\n"
       << "# solver: l_max cap " << cfg.solver.l_max << ", energy_rel_tol "
       << detail::format_double(cfg.solver.energy_rel_tol) << ", force "
       << method_name(cfg.solver.force_method) << "\n";
    os << "z_over_a,energy_reduced,force_reduced";
    if (with_beta) os << ",beta";
    os << ",l_max_used,converged\n";
    for (const auto& r : curve.rows) {
        os << detail::format_double(r.z_over_a) << ',';
        if (r.energy_reduced) os << detail::format_double(*r.energy_reduced);
        os << ',' << detail::format_double(r.force_reduced);
        if (with_beta) {
            os << ',';
            if (r.beta) os << detail::format_double(*r.beta);
        }
        os << ',' << r.l_max_used << ',' << (r.converged ? "true" : "false")
           << '\n';
    }
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file " + p.string());
    return f;
}

}  // namespace

void RunConfig::validate() const {
    if (!(z_min > 0.0)) throw ConfigError("z-min must be positive");
    if (!(z_max >= z_min)) throw ConfigError("z-max must be >= z-min");
    if (points < 1) throw ConfigError("points must be >= 1");
    if (curves.empty()) throw ConfigError("no curves selected");
    if (!(proximity_coefficient > 0.0))
        throw ConfigError("proximity coefficient must be positive");
    solver.validate();
}

SweepResult run_sweep(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    const std::vector<double> grid =
        make_grid(cfg.z_min, cfg.z_max, cfg.points, cfg.spacing);

    SweepResult result;
    std::vector<SweepRow> full_rows;
    double worst_hf_fd = 0.0;

    const bool want_full =
        std::count(cfg.curves.begin(), cfg.curves.end(), Curve::full) > 0;
    if (want_full) {
        full_rows.resize(grid.size());
        auto eval_point = [&](int i) {
            const model::Geometry geom(grid[i]);
            model::SolverConfig pc = cfg.solver;
            pc.threads = 1;  // the sweep parallelizes across points
            SweepRow row;
            row.z_over_a = grid[i];
            const auto rep = spectral::converge(geom, cfg.contrast, pc, false);
            row.energy_reduced = rep.energy.energy_reduced;
            row.l_max_used = rep.l_max_used;
            row.converged = rep.converged;
            model::SolverConfig fc = pc;
            fc.adaptive_truncation = false;
            fc.l_max = rep.l_max_used;
            fc.m_max = rep.m_max_used;
            const auto force = spectral::casimir_force(geom, cfg.contrast, fc);
            row.force_reduced = force.force_reduced;
            return std::make_pair(row, force.hf_fd_discrepancy);
        };

        const int workers = cfg.solver.effective_threads();
        if (workers > 1 && grid.size() > 1) {
            detail::ThreadPool pool(workers);
            std::vector<std::future<std::pair<SweepRow, std::optional<double>>>>
                futs;
            futs.reserve(grid.size());
            for (size_t i = 0; i < grid.size(); ++i)
                futs.push_back(pool.submit(
                    [&eval_point, i] { return eval_point(static_cast<int>(i)); }));
            for (size_t i = 0; i < grid.size(); ++i) {
                auto [row, disc] = futs[i].get();
                if (disc) worst_hf_fd = std::max(worst_hf_fd, *disc);
                full_rows[i] = row;
            }
        } else {
            for (size_t i = 0; i < grid.size(); ++i) {
                auto [row, disc] = eval_point(static_cast<int>(i));
                if (disc) worst_hf_fd = std::max(worst_hf_fd, *disc);
                full_rows[i] = row;
            }
        }

        for (const auto& r : full_rows) {
            log << "full: z/a=" << detail::format_double(r.z_over_a)
                << " E=" << detail::format_double(*r.energy_reduced)
                << " F=" << detail::format_double(r.force_reduced)
                << " l_max=" << r.l_max_used
                << (r.converged ? "" : "  [NOT CONVERGED]") << "\n";
            if (!r.converged) result.all_converged = false;
        }
        if (worst_hf_fd > 0.0)
            log << "worst analytic/finite-difference force discrepancy: "
                << detail::format_double(worst_hf_fd) << "\n";
    }

    // Proximity curves are rescaled through the full curve's innermost
    // point when available, so the charts compare shapes, not prefactors.
    auto proximity_coeff = [&](reference::ProximityRegime regime) {
        const int p =
            regime == reference::ProximityRegime::ideal_retarded ? 2 : 3;
        if (want_full && !full_rows.empty())
            return std::abs(full_rows.front().force_reduced) *
                   std::pow(grid.front(), p);
        return cfg.proximity_coefficient;
    };

    for (Curve c : cfg.curves) {
        SweepCurve sc;
        sc.curve = c;
        sc.label = curve_label(c);
        if (c == Curve::full) {
            sc.rows = full_rows;
        } else {
            sc.rows.reserve(grid.size());
            for (double z : grid) {
                const model::Geometry geom(z);
                SweepRow row;
                row.z_over_a = z;
                switch (c) {
                    case Curve::dipole: {
                        const auto ef =
                            reference::dipole_energy_force(geom, cfg.contrast);
                        row.energy_reduced = ef.energy_reduced;
                        row.force_reduced = ef.force_reduced;
                        row.l_max_used = 1;
                        break;
                    }
                    case Curve::quadrupole: {
                        const auto ef = reference::quadrupole_energy_force(
                            geom, cfg.contrast);
                        row.energy_reduced = ef.energy_reduced;
                        row.force_reduced = ef.force_reduced;
                        row.l_max_used = 2;
                        break;
                    }
                    case Curve::proximity_vdw:
                        row.force_reduced = reference::proximity_force(
                            geom, reference::ProximityRegime::vdw_nonretarded,
                            proximity_coeff(
                                reference::ProximityRegime::vdw_nonretarded));
                        break;
                    case Curve::proximity_ideal:
                        row.force_reduced = reference::proximity_force(
                            geom, reference::ProximityRegime::ideal_retarded,
                            proximity_coeff(
                                reference::ProximityRegime::ideal_retarded));
                        break;
                    case Curve::full:
                        break;
                }
                sc.rows.push_back(row);
            }
        }
        result.curves.push_back(std::move(sc));
    }

    const bool with_beta = cfg.points >= 3;
    if (!with_beta)
        log << "beta column omitted: needs at least 3 sweep points\n";
    if (with_beta) {
        for (auto& sc : result.curves) {
            std::vector<std::pair<double, double>> zf;
            zf.reserve(sc.rows.size());
            for (const auto& r : sc.rows)
                zf.emplace_back(r.z_over_a, r.force_reduced);
            const auto betas = spectral::local_exponent(zf);
            for (size_t i = 0; i < betas.size(); ++i)
                sc.rows[i + 1].beta = betas[i].second;
        }
    }

    fs::create_directories(cfg.out_dir);
    if (cfg.write_csv) {
        for (const auto& sc : result.curves) {
            const fs::path p =
                cfg.out_dir / ("sweep_" + curve_name(sc.curve) + ".csv");
            auto f = open_out(p);
            write_sweep_csv(f, cfg, sc, with_beta);
            result.files_written.push_back(p);
            log << "wrote " << p.string() << "\n";
        }
    }
    if (cfg.write_svg) {
        auto series_of = [&](auto value_of, bool abs_value) {
            std::vector<Series> out;
            size_t k = 0;
            for (const auto& sc : result.curves) {
                Series s;
                s.label = sc.label;
                s.color = kPalette[k++ % 5];
                for (const auto& r : sc.rows) {
                    const std::optional<double> v = value_of(r);
                    if (v)
                        s.pts.emplace_back(r.z_over_a,
                                           abs_value ? std::abs(*v) : *v);
                }
                if (!s.pts.empty()) out.push_back(std::move(s));
            }
            return out;
        };

        struct ChartSpec {
            const char* file;
            const char* title;
            const char* ylab;
            std::vector<Series> series;
            bool log_y;
        };
        std::vector<ChartSpec> charts;
        charts.push_back({"energy.svg", "reduced interaction energy",
                          "|E| (hbar omega_p)",
                          series_of([](const SweepRow& r) {
                              return r.energy_reduced;
                          }, true),
                          true});
        charts.push_back({"force.svg", "reduced force",
                          "|F a| (hbar omega_p)",
                          series_of([](const SweepRow& r) {
                              return std::optional<double>(r.force_reduced);
                          }, true),
                          true});
        charts.push_back({"beta.svg", "local force exponent",
                          "beta = -d ln|F| / d ln(z/a)",
                          series_of([](const SweepRow& r) { return r.beta; },
                                    false),
                          false});
        for (auto& ch : charts) {
            if (ch.series.empty()) continue;
            const fs::path p = cfg.out_dir / ch.file;
            auto f = open_out(p);
            write_chart(f, ch.title, "z/a", ch.ylab, true, ch.log_y,
                        ch.series);
            result.files_written.push_back(p);
            log << "wrote " << p.string() << "\n";
        }
    }
    return result;
}

ConvergenceRunResult run_convergence_report(double z_over_a,
                                            const RunConfig& cfg,
                                            std::ostream& log) {
    cfg.validate();
    const model::Geometry geom(z_over_a);
    ConvergenceRunResult out;
    out.report = spectral::converge(geom, cfg.contrast, cfg.solver, false);

    for (const auto& s : out.report.steps)
        log << "l_max=" << s.l_max
            << " E=" << detail::format_double(s.energy)
            << " rel_delta=" << detail::format_double(s.rel_delta)
            << " m_max=" << s.m_max_used << " wall="
            << detail::format_double(s.wall_seconds) << "s\n";
    log << (out.report.converged ? "converged" : "NOT converged")
        << " at l_max=" << out.report.l_max_used << "\n";

    if (cfg.write_csv) {
        fs::create_directories(cfg.out_dir);
        const fs::path p = cfg.out_dir / "convergence.csv";
        auto f = open_out(p);
        f << "# truncation ladder at z/a="
          << detail::format_double(z_over_a)
          << ", f_c=" << detail::format_double(cfg.contrast.f_c) << "\n"
          << "l_max,energy_reduced,rel_delta,m_max_used,wall_seconds\n";
        for (const auto& s : out.report.steps)
            f << s.l_max << ',' << detail::format_double(s.energy) << ','
              << detail::format_double(s.rel_delta) << ',' << s.m_max_used
              << ',' << detail::format_double(s.wall_seconds) << '\n';
        out.files_written.push_back(p);
        log << "wrote " << p.string() << "\n";
    }
    return out;
}

ModesRunResult run_modes(double z_over_a, const RunConfig& cfg,
                         double damping_ratio, std::optional<int> dump_block_m,
                         std::ostream& log) {
    cfg.validate();
    const model::Geometry geom(z_over_a);
    const model::DrudeSphere sphere(1.0, damping_ratio);

    ModesRunResult out;
    model::SolverConfig sc = cfg.solver;
    if (sc.adaptive_truncation) {
        const auto rep = spectral::converge(geom, cfg.contrast, sc, false);
        sc.l_max = rep.l_max_used;
        sc.m_max = rep.m_max_used;
        out.converged = rep.converged;
        if (!out.converged)
            log << "WARNING: basis not converged at the l_max cap; listing "
                   "modes at the cap anyway\n";
    }
    sc.adaptive_truncation = false;
    out.spectrum = spectral::solve_spectrum(geom, cfg.contrast, sc);

    if (model::damping_invalidates_energy(sphere))
        log << "WARNING: damping ratio "
            << detail::format_double(damping_ratio)
            << " shifts the mode frequencies; the lossless zero-point sum "
               "does not apply\n";

    fs::create_directories(cfg.out_dir);
    if (cfg.write_csv) {
        const fs::path p = cfg.out_dir / "modes.csv";
        auto f = open_out(p);
        f << "# proper modes at z/a=" << detail::format_double(z_over_a)
          << ", f_c=" << detail::format_double(cfg.contrast.f_c)
          << ", damping=" << detail::format_double(damping_ratio) << "\n"
          << "# l labels the diagonal slot the mode shifted from\n"
          << "m,l,eigenvalue,ref,delta,omega_re,omega_im\n";
        for (const auto& b : out.spectrum.per_m) {
            const int l_min = std::max(1, b.m);
            for (int s = 0; s < b.size(); ++s) {
                const auto omega = model::mode_frequency_of_eigenvalue(
                    sphere, b.eigenvalues[s]);
                f << b.m << ',' << l_min + s << ','
                  << detail::format_double(b.eigenvalues[s]) << ','
                  << detail::format_double(b.refs[s]) << ','
                  << detail::format_double(b.deltas[s]) << ','
                  << detail::format_double(omega.real()) << ','
                  << detail::format_double(omega.imag()) << '\n';
            }
        }
        out.files_written.push_back(p);
        log << "wrote " << p.string() << "\n";
    }
    if (dump_block_m) {
        const auto block =
            coupling::build_block(geom, cfg.contrast, *dump_block_m, sc.l_max);
        const fs::path p =
            cfg.out_dir / ("block_m" + std::to_string(*dump_block_m) + ".csv");
        auto f = open_out(p);
        coupling::write_block_csv(block, f);
        out.files_written.push_back(p);
        log << "wrote " << p.string() << "\n";
    }

    const size_t n_modes = [&] {
        size_t n = 0;
        for (const auto& b : out.spectrum.per_m) n += b.eigenvalues.size();
        return n;
    }();
    log << n_modes << " proper modes, m up to " << out.spectrum.m_max_used
        << ", l up to " << out.spectrum.l_max_used << "\n";
    return out;
}

}  // namespace casimir::run
