#include "rtv/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "rtv/errors.hpp"
#include "rtv/identity.hpp"
#include "rtv/modes.hpp"
#include "rtv/oracle.hpp"
#include "rtv/spectrum.hpp"

namespace rtv {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v == 0.0 ? 0.0 : v); }

std::string k_tag(double k) { return fmt::format("k{:g}", k); }

/// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first failure by index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    std::vector<std::exception_ptr> errors(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ReducedProblem make_problem(const RunConfig& config, double k) {
    return ReducedProblem(config.make_profile(), config.physical(k), config.numerical);
}

std::vector<double> scan_grid(const ReducedProblem& p) {
    return log_grid(p.lambda_floor(), p.lambda_max(), std::max(16, p.options().lambda_grid_points));
}

double sigma_end(const PhysicalParams& params, double lambda, double rho) {
    return std::sqrt(params.k * params.k + lambda * rho / params.mu);
}

VerifyCheck at_most(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, std::isfinite(value) && value <= threshold};
}

VerifyCheck at_least(std::string name, double value, double threshold) {
    return {std::move(name), value, threshold, std::isfinite(value) && value >= threshold};
}

}  // namespace

void write_atomic(const std::string& path, const std::string& text) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string(), "output");
        out << text;
        if (!out.flush()) throw ConfigError("write failed for " + tmp.string(), "output");
    }
    fs::rename(tmp, target);
}

std::vector<DispersionRow> dispersion_rows(const RunConfig& config, double k) {
    const auto problem = make_problem(config, k);
    const auto roots = solve_dispersion(problem, config.numerical.n_modes);
    const auto grid = log_grid(problem.eps_star(), problem.lambda_max(), std::max(16, problem.options().lambda_grid_points));
    const auto count = mode_count(problem, problem.eps_star(), grid, config.numerical.n_modes);
    std::vector<DispersionRow> rows;
    for (const auto& r : roots) {
        const auto rep = coercivity_check(problem.forms(r.lambda_n), problem.params());
        rows.push_back({k, r.n, r.lambda_n, r.residual, rep.margin, count.N});
    }
    return rows;
}

std::vector<VerifyCheck> verify_checks(const RunConfig& config, double k, std::uint64_t seed) {
    std::vector<VerifyCheck> out;
    const auto profile = config.make_profile();
    const auto params = config.physical(k);

    const auto pv = validate(profile, 2001);
    out.push_back({"profile.validate", pv.worst_fd_error, 0.0, pv.pass});

    const ReducedProblem problem(profile, params, config.numerical);
    const double lmax = problem.lambda_max();
    const int n_modes = config.numerical.n_modes;

    double worst_margin = std::numeric_limits<double>::infinity();
    bool coercive = true;
    double worst_asym = 0.0;
    const FormsObserver watch = [&](const DiscreteForms& f) {
        const auto rep = f.coercivity ? *f.coercivity : coercivity_check(f, params);
        worst_margin = std::min(worst_margin, rep.margin);
        coercive = coercive && rep.pass;
        worst_asym = std::max(worst_asym, f.asymmetry_norm / std::max(1.0, f.K.frobenius()));
    };
    const auto roots = solve_dispersion(problem, n_modes, watch);
    out.push_back({"coercivity.every_visited_lambda", worst_margin, 0.0, coercive});
    out.push_back(at_most("assembly.symmetry", worst_asym, 1e-10));

    double worst_bound = -std::numeric_limits<double>::infinity();
    for (const auto& r : roots) worst_bound = std::max(worst_bound, r.lambda_n - lmax);
    out.push_back({"growth_bound.lambda_le_lambda_max", worst_bound, 0.0, roots.empty() || worst_bound <= 0.0});

    if (problem.compact()) {
        // the scan reaches below the smallest root so every crossing is bracketed
        const double lo = roots.empty() ? problem.lambda_floor()
                                        : std::min(problem.lambda_floor(), 0.5 * roots.back().lambda_n);
        const auto scan = dispersion_scan(problem, log_grid(lo, lmax, std::max(16, config.numerical.lambda_grid_points)), n_modes);
        bool decreasing = static_cast<int>(roots.size()) == n_modes;
        for (std::size_t i = 1; i < roots.size(); ++i) decreasing = decreasing && roots[i].lambda_n < roots[i - 1].lambda_n;
        out.push_back({"compact.strictly_decreasing", static_cast<double>(roots.size()), static_cast<double>(n_modes), decreasing});
        int worst_changes = 1;
        for (int n = 1; n <= n_modes; ++n) {
            const int c = count_sign_changes(scan, n);
            if (c != 1) worst_changes = c;
        }
        out.push_back({"compact.one_sign_change_per_mode", static_cast<double>(worst_changes), 1.0, worst_changes == 1});
        double worst_increase = 0.0;
        const auto grid16 = log_grid(problem.lambda_floor(), lmax, 16);
        const auto s16 = dispersion_scan(problem, grid16, n_modes);
        const double c = params.g * params.k * params.k;
        for (std::size_t i = 1; i < grid16.size(); ++i)
            for (int n = 0; n < n_modes; ++n) {
                const double g0 = (s16.f[i - 1][n] + grid16[i - 1]) / c, g1 = (s16.f[i][n] + grid16[i]) / c;
                worst_increase = std::max(worst_increase, (g1 - g0) / std::abs(g0));
            }
        out.push_back(at_most("compact.gamma_nonincreasing", worst_increase, 1e-8));
        if (!roots.empty()) {
            const double lam = roots.front().lambda_n;
            const auto dc = gamma_derivative_check(problem, 1, lam, 1e-3 * lam);
            out.push_back(at_most("compact.derivative_identity", dc.relative_error, 1e-3));
        }
    } else {
        const auto scan = dispersion_scan(problem, scan_grid(problem), n_modes);
        const auto count = mode_count(scan, problem.eps_star(), params);
        out.push_back(at_least("general.roots_ge_mode_count", static_cast<double>(roots.size()), count.N));
        double worst_ratio = 0.0;
        for (double lam : {problem.eps_star(), lmax}) {
            const auto o = problem.outer(lam);
            for (const auto& u : {o.solutions->u1, o.solutions->u2, o.solutions->u3, o.solutions->u4})
                for (double r : u->ratios()) worst_ratio = std::max(worst_ratio, r);
        }
        out.push_back(at_most("general.picard_contraction", worst_ratio, 0.5 + 1e-6));
    }

    if (!roots.empty()) {
        const auto mode = glue_mode(problem, roots.front());
        out.push_back(at_most("mode1.gluing_jumps", gluing_jumps(mode).worst(), 1e-6));
        out.push_back(at_most("mode1.weak_residual", ode_residual(mode).weak, 1e-4));
        const auto fields = reconstruct_fields(mode, mode_sample_grid(mode));
        out.push_back(at_most("mode1.divergence_free", divergence_defect(fields, params), 1e-10));
        const auto id = whole_line_identity_check(mode, {.seed = seed});
        out.push_back(at_most("mode1.bilinear_identity", id.defect, 1e-6));

        double worst_oracle = 0.0;
        const std::size_t m = std::min<std::size_t>(3, roots.size());
        for (std::size_t i = 0; i < m; ++i) {
            const double lam = roots[i].lambda_n;
            const auto found = find_roots(profile, params, {0.98 * lam, 1.02 * lam}, 1e-12 * lmax);
            const double rel = found.empty() ? std::numeric_limits<double>::infinity()
                                             : std::abs(found.front() - lam) / lam;
            worst_oracle = std::max(worst_oracle, rel);
        }
        out.push_back(at_most("oracle.agreement", worst_oracle, 1e-4));
    }
    return out;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"dispersion", "modes", "outer-coeffs", "oracle", "verify"};
    return names;
}

int run_command(const std::string& command, const RunConfig& config, const CommandOptions& options,
                std::ostream& out) {
    const std::string dir = options.out_dir.empty() ? config.out_dir : options.out_dir;
    const auto& ks = config.k_values;

    if (command == "dispersion") {
        std::vector<std::vector<DispersionRow>> per_k(ks.size());
        parallel_for(ks.size(), options.threads, [&](std::size_t i) { per_k[i] = dispersion_rows(config, ks[i]); });
        std::ostringstream csv;
        csv << "k,n,lambda_n,residual,coercivity_margin,N_eps_star\n";
        std::size_t rows = 0;
        for (const auto& rs : per_k)
            for (const auto& r : rs) {
                csv << num(r.k) << ',' << r.n << ',' << num(r.lambda_n) << ',' << num(r.residual) << ','
                    << num(r.coercivity_margin) << ',' << r.N_eps_star << '\n';
                ++rows;
            }
        const auto path = (fs::path(dir) / "dispersion.csv").string();
        write_atomic(path, csv.str());
        out << "wrote " << rows << " rows to " << path << '\n';
        return 0;
    }

    if (command == "modes") {
        std::vector<std::vector<std::string>> written(ks.size());
        parallel_for(ks.size(), options.threads, [&](std::size_t i) {
            const auto problem = make_problem(config, ks[i]);
            for (const auto& root : solve_dispersion(problem, config.numerical.n_modes)) {
                const auto mode = glue_mode(problem, root);
                const auto f = reconstruct_fields(mode, mode_sample_grid(mode));
                std::ostringstream csv;
                csv << "x,phi,dphi,d2phi,d3phi,zeta,psi,theta,q\n";
                for (std::size_t j = 0; j < f.x.size(); ++j)
                    csv << num(f.x[j]) << ',' << num(f.phi[j]) << ',' << num(f.dphi[j]) << ',' << num(f.d2phi[j])
                        << ',' << num(f.d3phi[j]) << ',' << num(f.zeta[j]) << ',' << num(f.psi[j]) << ','
                        << num(f.theta[j]) << ',' << num(f.q[j]) << '\n';
                const auto path =
                    (fs::path(dir) / fmt::format("mode_{}_n{}_{:.10g}.csv", k_tag(ks[i]), root.n, root.lambda_n))
                        .string();
                write_atomic(path, csv.str());
                written[i].push_back(path);
            }
        });
        for (const auto& w : written)
            for (const auto& p : w) out << "wrote " << p << '\n';
        return 0;
    }

    if (command == "outer-coeffs") {
        std::vector<std::string> written(ks.size());
        parallel_for(ks.size(), options.threads, [&](std::size_t i) {
            const auto problem = make_problem(config, ks[i]);
            const auto& prm = problem.params();
            std::ostringstream csv;
            csv << "end,x_end,lambda,n11,n12,n21,n22,discriminant\n";
            for (double lam : scan_grid(problem)) {
                const auto o = problem.outer(lam);
                for (const auto& [name, bc, x, rho] :
                     {std::tuple{"minus", o.bc.left, problem.x_minus(), problem.profile().rho_minus()},
                      std::tuple{"plus", o.bc.right, problem.x_plus(), problem.profile().rho_plus()}}) {
                    const auto t = endpoint_test(bc, prm.k, sigma_end(prm, lam, rho));
                    csv << name << ',' << num(x) << ',' << num(lam) << ',' << num(bc.n11) << ',' << num(bc.n12)
                        << ',' << num(bc.n21) << ',' << num(bc.n22) << ',' << num(t.disc) << '\n';
                }
            }
            written[i] = (fs::path(dir) / fmt::format("outer_coeffs_{}.csv", k_tag(ks[i]))).string();
            write_atomic(written[i], csv.str());
        });
        for (const auto& p : written) out << "wrote " << p << '\n';
        return 0;
    }

    if (command == "oracle") {
        std::vector<std::string> written(ks.size());
        parallel_for(ks.size(), options.threads, [&](std::size_t i) {
            const auto problem = make_problem(config, ks[i]);
            std::ostringstream csv;
            csv << "lambda,sign,log_magnitude\n";
            for (double lam : scan_grid(problem)) {
                const auto e = evans_function(problem.profile(), problem.params(), lam);
                csv << num(lam) << ',' << e.sign() << ',' << num(e.log_magnitude()) << '\n';
            }
            written[i] = (fs::path(dir) / fmt::format("oracle_{}.csv", k_tag(ks[i]))).string();
            write_atomic(written[i], csv.str());
        });
        for (const auto& p : written) out << "wrote " << p << '\n';
        return 0;
    }

    if (command == "verify") {
        std::vector<std::vector<VerifyCheck>> per_k(ks.size());
        parallel_for(ks.size(), options.threads,
                     [&](std::size_t i) { per_k[i] = verify_checks(config, ks[i], options.seed); });
        bool all = true;
        out << std::left << std::setw(8) << "k" << std::setw(38) << "check" << std::setw(16) << "value"
            << std::setw(16) << "threshold" << "result\n";
        for (std::size_t i = 0; i < ks.size(); ++i)
            for (const auto& c : per_k[i]) {
                all = all && c.pass;
                out << std::left << std::setw(8) << num(ks[i]) << std::setw(38) << c.name << std::setw(16)
                    << fmt::format("{:.4g}", c.value) << std::setw(16) << fmt::format("{:.4g}", c.threshold)
                    << (c.pass ? "PASS" : "FAIL") << '\n';
            }
        out << (all ? "all checks passed" : "some checks failed") << '\n';
        return all ? 0 : 1;
    }

    throw ConfigError("unknown command '" + command + "'", "usage");
}

}  // namespace rtv
