#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <vector>

#include "polibias/errors.hpp"

namespace polibias {

struct LbfgsOptions {
    int memory = 10;
    double tol = 1e-6;          // stop on gradient sup-norm
    int max_iter = 1000;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 50;
};

struct LbfgsResult {
    std::vector<double> x;
    int iterations = 0;
    double objective = 0.0;
    double grad_sup_norm = 0.0;
    bool converged = false;
    std::vector<double> objective_history;  // f at x0, then after each accepted step
};

namespace detail {

inline double dot_dense(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace detail

/// Limited-memory BFGS with Armijo backtracking. `fg` evaluates the
/// objective and writes the gradient: double fg(const vector<double>& x,
/// vector<double>& grad). The accepted-step sequence is strictly
/// decreasing in f; everything is float64 and single-threaded, so runs
/// are bit-reproducible.
template <typename ObjGrad>
LbfgsResult lbfgs_minimize(ObjGrad&& fg, std::vector<double> x0, const LbfgsOptions& opt) {
    const std::size_t n = x0.size();
    std::vector<double> x = std::move(x0);
    std::vector<double> grad(n, 0.0), grad_new(n, 0.0), x_try(n, 0.0), direction(n, 0.0);

    double f = fg(x, grad);
    if (!std::isfinite(f)) throw NumericalError("objective is not finite at the starting point");

    LbfgsResult result;
    result.objective_history.push_back(f);

    struct Pair {
        std::vector<double> s, y;
        double sy;
    };
    std::deque<Pair> history;
    std::vector<double> alpha_buf;

    int iter = 0;
    for (; iter < opt.max_iter; ++iter) {
        if (detail::sup_norm(grad) <= opt.tol) {
            result.converged = true;
            break;
        }

        // Two-loop recursion; H0 scaled by the most recent curvature pair.
        direction = grad;
        alpha_buf.assign(history.size(), 0.0);
        for (std::size_t k = history.size(); k-- > 0;) {
            const auto& p = history[k];
            alpha_buf[k] = detail::dot_dense(p.s, direction) / p.sy;
            for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha_buf[k] * p.y[i];
        }
        if (!history.empty()) {
            const auto& last = history.back();
            const double gamma = last.sy / detail::dot_dense(last.y, last.y);
            for (auto& d : direction) d *= gamma;
        }
        for (std::size_t k = 0; k < history.size(); ++k) {
            const auto& p = history[k];
            const double beta = detail::dot_dense(p.y, direction) / p.sy;
            for (std::size_t i = 0; i < n; ++i) direction[i] += (alpha_buf[k] - beta) * p.s[i];
        }
        for (auto& d : direction) d = -d;

        double slope = detail::dot_dense(grad, direction);
        if (!(slope < 0.0)) {  // curvature info unusable, fall back to steepest descent
            direction = grad;
            for (auto& d : direction) d = -d;
            slope = -detail::dot_dense(grad, grad);
        }

        double step = history.empty() ? std::min(1.0, 1.0 / std::max(1.0, detail::sup_norm(grad))) : 1.0;
        double f_new = f;
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) x_try[i] = x[i] + step * direction[i];
            f_new = fg(x_try, grad_new);
            if (std::isfinite(f_new) && f_new <= f + opt.armijo_c * step * slope) {
                accepted = true;
                break;
            }
            step *= opt.backtrack;
        }
        if (!accepted) break;  // no decrease found along the descent direction

        Pair p;
        p.s.resize(n);
        p.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            p.s[i] = x_try[i] - x[i];
            p.y[i] = grad_new[i] - grad[i];
        }
        p.sy = detail::dot_dense(p.s, p.y);
        if (p.sy > 1e-10 * std::sqrt(detail::dot_dense(p.s, p.s)) *
                        std::sqrt(detail::dot_dense(p.y, p.y))) {
            history.push_back(std::move(p));
            if (history.size() > static_cast<std::size_t>(opt.memory)) history.pop_front();
        }

        x.swap(x_try);
        grad.swap(grad_new);
        f = f_new;
        result.objective_history.push_back(f);
        result.iterations = iter + 1;
    }

    if (iter == opt.max_iter || !result.converged)
        result.converged = detail::sup_norm(grad) <= opt.tol;
    result.x = std::move(x);
    result.objective = f;
    result.grad_sup_norm = detail::sup_norm(grad);
    return result;
}

} // namespace polibias
