#include "kdtpl/pl_estimator.hpp"

#include "kdtpl/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace kdtpl {

namespace {

void check_params(const PlParams& p) {
    if (!(p.sigma2 > 0.0) || !(std::abs(p.psi) < 1.0) || !std::isfinite(p.beta))
        fail(ErrorCode::InvalidParams, "need sigma2 > 0 and |psi| < 1");
}

double couple_term(double q, double sigma2, double psi, double ssq, double cross) {
    const double one_minus = 1.0 - psi * psi;
    return -q * std::log(2.0 * std::numbers::pi * sigma2 * std::sqrt(one_minus)) -
           (ssq - 2.0 * psi * cross) / (2.0 * sigma2 * one_minus);
}

// Residual sum of squares over both members and residual cross-product sum,
// as functions of beta.
double residual_ssq(const SufficientStats& st, double beta) {
    return st.a2 - 2.0 * beta * st.a3 + beta * beta * st.a1;
}

double residual_cross(const SufficientStats& st, double beta) {
    return st.a6 - beta * st.a4 + beta * beta * st.a5;
}

} // namespace

PairedSample extract_paired_sample(const PointSet& points, const CoupletSet& cs) {
    PairedSample s;
    if (cs.q() == 0) return s;
    if (!points.has_data())
        fail(ErrorCode::MissingData, "points carry no covariate/response columns");
    if (cs.n() != points.size())
        fail(ErrorCode::MissingData, "couplets refer to a point set of different size");
    const auto x = points.covariate();
    const auto y = points.response();
    s.x_i.reserve(cs.q());
    s.y_i.reserve(cs.q());
    s.x_l.reserve(cs.q());
    s.y_l.reserve(cs.q());
    for (const auto& c : cs.couplets()) {
        if (!std::isfinite(x[c.i]) || !std::isfinite(y[c.i]) || !std::isfinite(x[c.l]) ||
            !std::isfinite(y[c.l]))
            fail(ErrorCode::MissingData, "missing value at coupled index");
        s.x_i.push_back(x[c.i]);
        s.y_i.push_back(y[c.i]);
        s.x_l.push_back(x[c.l]);
        s.y_l.push_back(y[c.l]);
    }
    return s;
}

SufficientStats sufficient_statistics(const PairedSample& s) {
    const std::size_t q = s.q();
    if (q == 0) fail(ErrorCode::EmptySample, "no couples");
    if (s.y_i.size() != q || s.x_l.size() != q || s.y_l.size() != q)
        fail(ErrorCode::InvalidArgument, "paired sample arrays differ in length");
    SufficientStats st;
    st.q = q;
    for (std::size_t k = 0; k < q; ++k) {
        const double xi = s.x_i[k], yi = s.y_i[k], xl = s.x_l[k], yl = s.y_l[k];
        st.a1 += xi * xi + xl * xl;
        st.a2 += yi * yi + yl * yl;
        st.a3 += xi * yi + xl * yl;
        st.a4 += xi * yl + xl * yi;
        st.a5 += xi * xl;
        st.a6 += yi * yl;
    }
    return st;
}

double pairwise_loglik(const PairedSample& s, const PlParams& p) {
    check_params(p);
    double ssq = 0.0, cross = 0.0;
    for (std::size_t k = 0; k < s.q(); ++k) {
        const double ei = s.y_i[k] - p.beta * s.x_i[k];
        const double el = s.y_l[k] - p.beta * s.x_l[k];
        ssq += ei * ei + el * el;
        cross += ei * el;
    }
    return couple_term(static_cast<double>(s.q()), p.sigma2, p.psi, ssq, cross);
}

double pairwise_loglik(const SufficientStats& st, const PlParams& p) {
    check_params(p);
    return couple_term(static_cast<double>(st.q), p.sigma2, p.psi, residual_ssq(st, p.beta),
                       residual_cross(st, p.beta));
}

PlParams pl_sweep(const SufficientStats& st, double psi) {
    const double denom = st.a1 - 2.0 * psi * st.a5;
    if (std::abs(denom) < 1e-12) fail(ErrorCode::SingularSystem, "a1 - 2 psi a5 vanishes");
    PlParams p;
    p.beta = (st.a3 - psi * st.a4) / denom;
    const double b = p.beta;
    p.sigma2 = (st.a2 + b * b * st.a1 - 2.0 * b * st.a3 - 2.0 * psi * st.a6 -
                2.0 * psi * b * b * st.a5 + 2.0 * psi * b * st.a4) /
               (2.0 * static_cast<double>(st.q) * (1.0 - psi * psi));
    if (!(p.sigma2 > 0.0)) fail(ErrorCode::DegenerateVariance, "sigma2 is not positive");
    p.psi = (st.a6 - b * st.a4 + b * b * st.a5) / (static_cast<double>(st.q) * p.sigma2);
    return p;
}

PlFit solve_pl(const SufficientStats& st, const PlSolverOptions& options) {
    if (st.q < 3)
        fail(ErrorCode::InsufficientCouples,
             "need at least 3 couples, got " + std::to_string(st.q));

    const double clamp = options.psi_clamp;
    PlFit fit;
    fit.q = st.q;

    double psi = 0.0;
    PlParams prev{};
    // Plain substitution contracts only while psi^2 < 1/2; the relaxation
    // factor halves whenever the psi residual grows, which leaves the fixed
    // points unchanged.
    double relax = 1.0;
    double last_step = std::numeric_limits<double>::infinity();

    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        const PlParams sweep = pl_sweep(st, psi);
        const double step = sweep.psi - psi;
        if (std::abs(step) > last_step) relax *= 0.5;
        last_step = std::abs(step);
        const double next = std::clamp(psi + relax * step, -clamp, clamp);

        double change = std::abs(next - psi);
        if (it > 1)
            change = std::max({change, std::abs(sweep.beta - prev.beta),
                               std::abs(sweep.sigma2 - prev.sigma2)});
        prev = sweep;
        psi = next;
        fit.iterations = it;
        if (change < options.tolerance) {
            fit.converged = true;
            break;
        }
    }

    const PlParams last = pl_sweep(st, psi);
    fit.params = {last.beta, last.sigma2, psi};
    if (std::abs(psi) >= clamp) fit.converged = false;
    fit.loglik = pairwise_loglik(st, fit.params);
    return fit;
}

namespace {

using Vec3 = std::array<double, 3>;

struct Simplex {
    std::array<Vec3, 4> v;
    std::array<double, 4> f;
};

// Nelder-Mead on R^3. Returns false if the evaluation budget ran out.
bool nelder_mead(const std::function<double(const Vec3&)>& fn, Vec3& x, double& fx,
                 double step, std::size_t max_evals) {
    Simplex s;
    s.v[0] = x;
    for (int d = 0; d < 3; ++d) {
        s.v[d + 1] = x;
        s.v[d + 1][d] += step;
    }
    std::size_t evals = 0;
    auto eval = [&](const Vec3& p) {
        ++evals;
        const double r = fn(p);
        return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    };
    for (int i = 0; i < 4; ++i) s.f[i] = eval(s.v[i]);

    auto combine = [](const Vec3& a, const Vec3& b, double t) {
        Vec3 r;
        for (int d = 0; d < 3; ++d) r[d] = a[d] + t * (b[d] - a[d]);
        return r;
    };

    while (evals < max_evals) {
        std::array<int, 4> idx{0, 1, 2, 3};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return s.f[a] < s.f[b]; });
        Simplex t;
        for (int i = 0; i < 4; ++i) {
            t.v[i] = s.v[idx[i]];
            t.f[i] = s.f[idx[i]];
        }
        s = t;

        double diameter = 0.0;
        for (int i = 1; i < 4; ++i)
            for (int d = 0; d < 3; ++d) diameter = std::max(diameter, std::abs(s.v[i][d] - s.v[0][d]));
        const double spread = s.f[3] - s.f[0];
        if (diameter < 1e-11 || spread <= 1e-16 * (1.0 + std::abs(s.f[0]))) {
            x = s.v[0];
            fx = s.f[0];
            return true;
        }

        Vec3 centroid{0, 0, 0};
        for (int i = 0; i < 3; ++i)
            for (int d = 0; d < 3; ++d) centroid[d] += s.v[i][d] / 3.0;

        const Vec3 xr = combine(centroid, s.v[3], -1.0);
        const double fr = eval(xr);
        if (fr < s.f[0]) {
            const Vec3 xe = combine(centroid, s.v[3], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                s.v[3] = xe;
                s.f[3] = fe;
            } else {
                s.v[3] = xr;
                s.f[3] = fr;
            }
        } else if (fr < s.f[2]) {
            s.v[3] = xr;
            s.f[3] = fr;
        } else {
            const bool outside = fr < s.f[3];
            const Vec3 xc = outside ? combine(centroid, xr, 0.5) : combine(centroid, s.v[3], 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : s.f[3])) {
                s.v[3] = xc;
                s.f[3] = fc;
            } else {
                for (int i = 1; i < 4; ++i) {
                    s.v[i] = combine(s.v[0], s.v[i], 0.5);
                    s.f[i] = eval(s.v[i]);
                }
            }
        }
    }
    auto best = std::min_element(s.f.begin(), s.f.end()) - s.f.begin();
    x = s.v[best];
    fx = s.f[best];
    return false;
}

} // namespace

PlFit numerical_pl_mle(const PairedSample& s) {
    const std::size_t q = s.q();
    if (q < 3)
        fail(ErrorCode::InsufficientCouples, "need at least 3 couples, got " + std::to_string(q));

    // Unconstrained coordinates: (beta, log sigma2, atanh psi).
    auto to_params = [](const Vec3& u) { return PlParams{u[0], std::exp(u[1]), std::tanh(u[2])}; };
    auto objective = [&](const Vec3& u) {
        const PlParams p = to_params(u);
        if (!(p.sigma2 > 0.0) || !(std::abs(p.psi) < 1.0)) return std::numeric_limits<double>::infinity();
        return -pairwise_loglik(s, p);
    };

    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        sxy += s.x_i[k] * s.y_i[k] + s.x_l[k] * s.y_l[k];
        sxx += s.x_i[k] * s.x_i[k] + s.x_l[k] * s.x_l[k];
    }
    const double beta0 = sxx > 0.0 ? sxy / sxx : 0.0;
    double rss = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        const double ei = s.y_i[k] - beta0 * s.x_i[k];
        const double el = s.y_l[k] - beta0 * s.x_l[k];
        rss += ei * ei + el * el;
    }
    const double log_s2 = std::log(std::max(rss / (2.0 * static_cast<double>(q)), 1e-12));

    Vec3 best{};
    double best_f = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (double psi0 = -0.9; psi0 <= 0.9 + 1e-9; psi0 += 0.3) {
        Vec3 u{beta0, log_s2, std::atanh(psi0)};
        double fu = objective(u);
        bool ok = nelder_mead(objective, u, fu, 0.25, 20'000);
        // Restarts shake the simplex out of premature collapse.
        for (int r = 0; r < 4; ++r) {
            Vec3 v = u;
            double fv = fu;
            ok = nelder_mead(objective, v, fv, 1e-3, 20'000) && ok;
            if (fv < fu) {
                u = v;
                fu = fv;
            }
        }
        any_converged = any_converged || ok;
        if (fu < best_f) {
            best_f = fu;
            best = u;
        }
    }
    if (!any_converged || !std::isfinite(best_f))
        fail(ErrorCode::NoConvergence, "simplex search did not converge");

    PlFit fit;
    fit.params = to_params(best);
    fit.loglik = -best_f;
    fit.converged = true;
    fit.q = q;
    return fit;
}

} // namespace kdtpl
