#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace optnet {

/// One-panel Gauss-Kronrod 7/15 estimate on [a, b]. Returns the K15 value
/// and writes |K15 - G7| based error estimate to `err`.
template <class Func>
double quad_gk15(const Func& f, double a, double b, double& err) {
    // positive Kronrod abscissae; G7 nodes are the even-index entries
    static const double xgk[8] = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.0};
    static const double wgk[8] = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839998060075570, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static const double wg[4] = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double fc = f(center);
    double k15 = wgk[7] * fc;
    double g7 = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * xgk[i];
        const double fsum = f(center - dx) + f(center + dx);
        k15 += wgk[i] * fsum;
        if (i % 2 == 1) g7 += wg[i / 2] * fsum;
    }
    k15 *= half;
    g7 *= half;

    err = std::fabs(k15 - g7);
    // QUADPACK-style sharpening of the raw difference
    err = 200.0 * err;
    err = (err >= 1.0) ? err : err * std::sqrt(err);
    return k15;
}

/// Adaptive bisection driver around quad_gk15. Converges when the summed
/// panel error drops under max(rel_tol*|integral|, abs_tol). Throws
/// std::runtime_error if the panel budget runs out first.
template <class Func>
double integrate_adaptive(const Func& f, double a, double b, double rel_tol = 1e-9,
                          double abs_tol = 1e-300, std::size_t max_panels = 4000) {
    struct Panel {
        double a, b, value, err;
    };
    double err0;
    double v0 = quad_gk15(f, a, b, err0);
    std::vector<Panel> panels{{a, b, v0, err0}};

    for (std::size_t round = 0; round < max_panels; ++round) {
        double total = 0.0, total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            total_err += panels[i].err;
            if (panels[i].err > panels[worst].err) worst = i;
        }
        if (total_err <= std::max(rel_tol * std::fabs(total), abs_tol)) return total;

        const Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) return total;  // interval exhausted at double precision
        double el, er;
        const double vl = quad_gk15(f, p.a, mid, el);
        const double vr = quad_gk15(f, mid, p.b, er);
        panels[worst] = {p.a, mid, vl, el};
        panels.push_back({mid, p.b, vr, er});
    }
    throw std::runtime_error("integrate_adaptive: panel budget exhausted before convergence");
}

struct QuadNode {
    double x;
    double w;
};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton on the
/// Legendre recurrence and cached per order. Thread safe.
inline const std::vector<QuadNode>& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, std::vector<QuadNode>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<QuadNode> nodes(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = {-x, w};
        nodes[static_cast<std::size_t>(n - 1 - i)] = {x, w};
    }
    return cache.emplace(n, std::move(nodes)).first->second;
}

/// Fixed-order Gauss-Legendre integral of f over [a, b].
template <class Func>
double integrate_fixed(const Func& f, double a, double b, int order) {
    const auto& nodes = gauss_legendre(order);
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (const auto& node : nodes) sum += node.w * f(center + half * node.x);
    return half * sum;
}

}  // namespace optnet
