#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hetnet/config.hpp"

namespace hetnet {

// Uniform bucket grid over the square [-R, R]^2 with points stored
// contiguously per cell (SoA), so a cell can be handed to a SIMD kernel.
class CellGrid {
public:
    void build(const std::vector<double>& px, const std::vector<double>& py, const std::vector<double>& pw,
               const std::vector<std::int32_t>& ids, const Window& w, double cell_hint) {
        const double L = 2.0 * w.radius;
        wrap_ = w.mode == BoundaryMode::torus;
        period_ = L;
        n_ = std::clamp(static_cast<int>(std::floor(L / std::max(cell_hint, 1e-9))), 1, 2048);
        cell_ = L / n_;
        origin_ = -w.radius;
        start_.assign(static_cast<std::size_t>(n_) * n_ + 1, 0);
        std::vector<std::uint32_t> cid(px.size());
        for (std::size_t i = 0; i < px.size(); ++i) {
            cid[i] = static_cast<std::uint32_t>(index(clamp_cell(px[i]), clamp_cell(py[i])));
            ++start_[cid[i] + 1];
        }
        for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
        x_.resize(px.size());
        y_.resize(px.size());
        w_.resize(px.size());
        id_.resize(px.size());
        std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < px.size(); ++i) {
            std::uint32_t at = fill[cid[i]]++;
            x_[at] = px[i];
            y_[at] = py[i];
            w_[at] = pw.empty() ? 0.0 : pw[i];
            id_[at] = ids[i];
        }
    }

    int cells_per_side() const { return n_; }
    double cell_size() const { return cell_; }
    bool wraps() const { return wrap_; }
    std::size_t size() const { return x_.size(); }
    int cell_of(double v) const { return clamp_cell(v); }

    // Visits every cell at Chebyshev distance r from (cx, cy). The callback
    // receives the cell's storage range and the offset to subtract from the
    // query so that wrapped images line up.
    template <class F>
    void for_ring(int cx, int cy, int r, F&& f) const {
        if (r == 0) {
            visit(cx, cy, f);
            return;
        }
        for (int dx = -r; dx <= r; ++dx) {
            visit(cx + dx, cy - r, f);
            visit(cx + dx, cy + r, f);
        }
        for (int dy = -r + 1; dy <= r - 1; ++dy) {
            visit(cx - r, cy + dy, f);
            visit(cx + r, cy + dy, f);
        }
    }

    // Largest ring that can still contain unseen points.
    int max_ring(int cx, int cy) const {
        if (wrap_) return n_ / 2 + 1;
        return std::max({cx, cy, n_ - 1 - cx, n_ - 1 - cy});
    }

    const double* x() const { return x_.data(); }
    const double* y() const { return y_.data(); }
    const double* w() const { return w_.data(); }
    const std::int32_t* id() const { return id_.data(); }

private:
    int clamp_cell(double v) const {
        int c = static_cast<int>(std::floor((v - origin_) / cell_));
        return std::clamp(c, 0, n_ - 1);
    }
    std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * n_ + cx; }

    template <class F>
    void visit(int cx, int cy, F& f) const {
        double sx = 0.0, sy = 0.0;
        if (cx < 0 || cx >= n_ || cy < 0 || cy >= n_) {
            if (!wrap_) return;
            int wx = ((cx % n_) + n_) % n_, wy = ((cy % n_) + n_) % n_;
            sx = static_cast<double>((cx - wx) / n_) * period_;
            sy = static_cast<double>((cy - wy) / n_) * period_;
            cx = wx;
            cy = wy;
        }
        std::size_t c = index(cx, cy);
        std::uint32_t b = start_[c], e = start_[c + 1];
        if (b != e) f(b, e, sx, sy);
    }

    bool wrap_ = false;
    int n_ = 1;
    double cell_ = 1.0, origin_ = 0.0, period_ = 0.0;
    std::vector<std::uint32_t> start_;
    std::vector<double> x_, y_, w_;
    std::vector<std::int32_t> id_;
};

} // namespace hetnet
