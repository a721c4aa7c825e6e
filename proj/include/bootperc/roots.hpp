#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace bootperc {

/// Outcome of a left-to-right scan for the first downward crossing.
struct ScanRoot {
    double root = 0.0;
    double lo = 0.0;  // bracket with f(lo) > 0 >= f(hi)
    double hi = 0.0;
    double residual = 0.0;
    bool found = false;           // a crossing inside (start, end]
    bool negative_at_start = false;
    std::vector<double> grid;     // scanned abscissae up to and including hi
    std::vector<double> values;
};

/// Scans f on start, start+step, ..., end (end always included) and returns the
/// first grid point where f <= 0, refined by bisection until |f| < tol or the
/// bracket collapses to adjacent doubles.
template <class F>
ScanRoot scan_first_root(F&& f, double start, double end, double step, double tol) {
    ScanRoot out;
    double prev_y = start;
    double prev_f = f(start);
    out.grid.push_back(prev_y);
    out.values.push_back(prev_f);
    if (prev_f <= 0.0) {
        out.negative_at_start = true;
        out.root = out.lo = out.hi = start;
        out.residual = std::abs(prev_f);
        return out;
    }
    const auto steps = static_cast<std::size_t>(std::ceil((end - start) / step));
    for (std::size_t k = 1; k <= steps; ++k) {
        const double y = k == steps ? end : start + static_cast<double>(k) * step;
        const double fy = f(y);
        out.grid.push_back(y);
        out.values.push_back(fy);
        if (fy <= 0.0) {
            out.found = true;
            double a = prev_y, b = y;
            double fb = fy;
            if (fb == 0.0) {
                out.root = out.hi = y;
                out.lo = prev_y;
                out.residual = 0.0;
                return out;
            }
            double m = b, fm = fb;
            for (int it = 0; it < 400; ++it) {
                m = 0.5 * (a + b);
                if (m <= a || m >= b) break;
                fm = f(m);
                if (fm > 0.0)
                    a = m;
                else
                    b = m;
                if (std::abs(fm) < 0.5 * tol) break;
            }
            // report the bracket end closest to zero
            const double fa = f(a);
            fb = f(b);
            if (std::abs(fm) <= std::min(std::abs(fa), std::abs(fb))) {
                out.root = m;
                out.residual = std::abs(fm);
            } else if (std::abs(fa) < std::abs(fb)) {
                out.root = a;
                out.residual = std::abs(fa);
            } else {
                out.root = b;
                out.residual = std::abs(fb);
            }
            out.lo = a;
            out.hi = b;
            return out;
        }
        prev_y = y;
        prev_f = fy;
    }
    out.root = out.lo = out.hi = end;
    out.residual = std::abs(prev_f);
    return out;
}

}  // namespace bootperc
