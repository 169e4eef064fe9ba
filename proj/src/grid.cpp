#include "celltrack/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

namespace celltrack {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr int kDx4[4] = {1, -1, 0, 0};
constexpr int kDy4[4] = {0, 0, 1, -1};

// Exact value a + b*sqrt(2) with non-negative integer coefficients.
struct LatticeLength {
    std::int64_t axial = 0;
    std::int64_t diagonal = 0;

    double value() const { return static_cast<double>(axial) + static_cast<double>(diagonal) * kSqrt2; }
};

// Sign of (da + db*sqrt(2)), computed exactly.
int lattice_sign(std::int64_t da, std::int64_t db) {
    if (da >= 0 && db >= 0) return (da > 0 || db > 0) ? 1 : 0;
    if (da <= 0 && db <= 0) return -1;
    // Opposite signs: compare da^2 with 2 db^2.
    const std::int64_t lhs = da * da;
    const std::int64_t rhs = 2 * db * db;
    if (da > 0) return lhs > rhs ? 1 : -1;
    return rhs > lhs ? 1 : -1;
}

bool lattice_less(const LatticeLength& a, const LatticeLength& b) {
    return lattice_sign(a.axial - b.axial, a.diagonal - b.diagonal) < 0;
}

// Squared 1D distance transform over finite sites only (Felzenszwalb-Huttenlocher).
void edt_1d(const double* f, int n, int stride, double* out, int out_stride, std::vector<int>& v,
            std::vector<double>& z) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        const double fq = f[q * stride];
        if (!std::isfinite(fq)) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
            continue;
        }
        double s = 0.0;
        while (true) {
            const int p = v[k];
            const double fp = f[p * stride];
            s = ((fq + static_cast<double>(q) * q) - (fp + static_cast<double>(p) * p)) / (2.0 * (q - p));
            if (s <= z[k]) {
                --k;
                if (k < 0) break;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = k == 0 ? -inf : s;
        z[k + 1] = inf;
    }
    if (k < 0) {
        for (int q = 0; q < n; ++q) out[q * out_stride] = inf;
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double d = static_cast<double>(q - v[j]);
        out[q * out_stride] = d * d + f[v[j] * stride];
    }
}

struct Box {
    int x0 = std::numeric_limits<int>::max();
    int y0 = std::numeric_limits<int>::max();
    int x1 = -1;
    int y1 = -1;
    void add(int x, int y) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
    }
    bool empty() const { return x1 < 0; }
};

}  // namespace

Label LabelFrame::max_label() const {
    Label m = 0;
    for (Label v : raster.values()) m = std::max(m, v);
    return m;
}

LabelFrame relabel_components(const LabelFrame& frame) {
    const auto& in = frame.raster;
    LabelFrame out(in.width(), in.height(), frame.frame_index);
    auto& lab = out.raster;
    Label next = 0;
    std::vector<int> stack;
    for (int idx = 0; idx < static_cast<int>(in.size()); ++idx) {
        const Label v = in[idx];
        if (v == 0 || lab[idx] != 0) continue;
        ++next;
        lab[idx] = next;
        stack.push_back(idx);
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            const Point p = in.point(cur);
            for (int d = 0; d < 4; ++d) {
                const int nx = p.x + kDx4[d];
                const int ny = p.y + kDy4[d];
                if (!in.contains(nx, ny)) continue;
                const int n = in.index(nx, ny);
                if (in[n] == v && lab[n] == 0) {
                    lab[n] = next;
                    stack.push_back(n);
                }
            }
        }
    }
    return out;
}

RealRaster compute_edm(const LabelFrame& frame) {
    const auto& lab = frame.raster;
    const int w = lab.width();
    const int h = lab.height();
    RealRaster out(w, h, -1.0);
    const Label maxl = frame.max_label();
    if (maxl == 0) return out;

    std::vector<Box> boxes(static_cast<std::size_t>(maxl) + 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (Label v = lab(x, y)) boxes[v].add(x, y);

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> f, g;
    std::vector<int> v;
    std::vector<double> z;
    for (Label id = 1; id <= maxl; ++id) {
        const Box& b = boxes[id];
        if (b.empty()) continue;
        // The ring just outside the bounding box never belongs to the cell, so the
        // nearest non-cell pixel always lies inside the expanded crop.
        const int cx0 = std::max(0, b.x0 - 1);
        const int cy0 = std::max(0, b.y0 - 1);
        const int cx1 = std::min(w - 1, b.x1 + 1);
        const int cy1 = std::min(h - 1, b.y1 + 1);
        const int cw = cx1 - cx0 + 1;
        const int ch = cy1 - cy0 + 1;
        f.assign(static_cast<std::size_t>(cw) * ch, 0.0);
        g.assign(f.size(), 0.0);
        bool any_site = false;
        for (int y = 0; y < ch; ++y)
            for (int x = 0; x < cw; ++x) {
                const bool inside = lab(cx0 + x, cy0 + y) == id;
                f[static_cast<std::size_t>(y) * cw + x] = inside ? inf : 0.0;
                any_site = any_site || !inside;
            }
        if (!any_site) {
            // A single cell covering the entire raster: fall back to the raster border.
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    out(x, y) = static_cast<double>(std::min({x + 1, y + 1, w - x, h - y}));
            continue;
        }
        const int n = std::max(cw, ch);
        v.assign(static_cast<std::size_t>(n) + 1, 0);
        z.assign(static_cast<std::size_t>(n) + 2, 0.0);
        for (int x = 0; x < cw; ++x) edt_1d(&f[x], ch, cw, &g[x], cw, v, z);
        for (int y = 0; y < ch; ++y) {
            const std::size_t row = static_cast<std::size_t>(y) * cw;
            edt_1d(&g[row], cw, 1, &f[row], 1, v, z);
        }
        for (int y = b.y0; y <= b.y1; ++y)
            for (int x = b.x0; x <= b.x1; ++x)
                if (lab(x, y) == id)
                    out(x, y) = std::sqrt(f[static_cast<std::size_t>(y - cy0) * cw + (x - cx0)]);
    }
    return out;
}

namespace {

// Local bounding-box index of a pixel list; -1 marks pixels outside the list.
struct LocalGrid {
    int x0 = 0, y0 = 0, w = 0, h = 0;
    std::vector<int> slot;

    explicit LocalGrid(const std::vector<Point>& pixels) {
        Box b;
        for (const Point& p : pixels) b.add(p.x, p.y);
        x0 = b.x0;
        y0 = b.y0;
        w = b.x1 - b.x0 + 1;
        h = b.y1 - b.y0 + 1;
        slot.assign(static_cast<std::size_t>(w) * h, -1);
        for (int i = 0; i < static_cast<int>(pixels.size()); ++i)
            slot[static_cast<std::size_t>(pixels[i].y - y0) * w + (pixels[i].x - x0)] = i;
    }

    int at(int x, int y) const {
        const int lx = x - x0;
        const int ly = y - y0;
        if (lx < 0 || ly < 0 || lx >= w || ly >= h) return -1;
        return slot[static_cast<std::size_t>(ly) * w + lx];
    }
};

std::vector<double> geodesic_from(const std::vector<Point>& pixels, const LocalGrid& grid, int source) {
    const int n = static_cast<int>(pixels.size());
    std::vector<LatticeLength> dist(static_cast<std::size_t>(n));
    std::vector<char> reached(static_cast<std::size_t>(n), 0);
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    using Entry = std::pair<LatticeLength, int>;
    auto cmp = [](const Entry& a, const Entry& b) {
        if (lattice_less(b.first, a.first)) return true;
        if (lattice_less(a.first, b.first)) return false;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
    dist[source] = {0, 0};
    reached[source] = 1;
    pq.push({dist[source], source});
    while (!pq.empty()) {
        const auto [d, i] = pq.top();
        pq.pop();
        if (done[i]) continue;
        done[i] = 1;
        const Point p = pixels[i];
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int j = grid.at(p.x + dx, p.y + dy);
                if (j < 0 || done[j]) continue;
                LatticeLength cand = d;
                if (dx != 0 && dy != 0)
                    ++cand.diagonal;
                else
                    ++cand.axial;
                if (!reached[j] || lattice_less(cand, dist[j])) {
                    reached[j] = 1;
                    dist[j] = cand;
                    pq.push({cand, j});
                }
            }
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out[i] = reached[i] ? dist[i].value() : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace

std::vector<double> compute_geodesic_distance(const CellRegion& region, Point source) {
    if (region.pixels.empty()) throw DataError("geodesic distance on an empty region");
    LocalGrid grid(region.pixels);
    const int s = grid.at(source.x, source.y);
    if (s < 0)
        throw DataError("geodesic source (" + std::to_string(source.x) + "," + std::to_string(source.y) +
                        ") lies outside region " + std::to_string(region.label));
    return geodesic_from(region.pixels, grid, s);
}

Point compute_medoid(const CellRegion& region, MedoidMetric metric) {
    return compute_medoid(region.pixels, metric);
}

Point compute_medoid(const std::vector<Point>& pixels, MedoidMetric metric) {
    const int n = static_cast<int>(pixels.size());
    if (n == 0) throw DataError("medoid of an empty region");
    if (n == 1) return pixels[0];

    auto better = [](double sum, Point p, double best, Point bp) {
        if (std::isinf(best)) return true;
        const double tol = 1e-9 * std::max(1.0, best);
        if (sum < best - tol) return true;
        if (sum > best + tol) return false;
        return std::tie(p.y, p.x) < std::tie(bp.y, bp.x);
    };

    if (metric == MedoidMetric::geodesic) {
        LocalGrid grid(pixels);
        double best = std::numeric_limits<double>::infinity();
        Point bp = pixels[0];
        for (int i = 0; i < n; ++i) {
            const auto d = geodesic_from(pixels, grid, i);
            const double s = std::accumulate(d.begin(), d.end(), 0.0);
            if (better(s, pixels[i], best, bp)) {
                best = s;
                bp = pixels[i];
            }
        }
        return bp;
    }

    double cx = 0.0, cy = 0.0;
    Box b;
    for (const Point& p : pixels) {
        cx += p.x;
        cy += p.y;
        b.add(p.x, p.y);
    }
    cx /= n;
    cy /= n;
    const int bw = b.x1 - b.x0;
    const int bh = b.y1 - b.y0;
    std::vector<double> root(static_cast<std::size_t>(bw * bw + bh * bh) + 1);
    for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(static_cast<double>(i));

    // Visit candidates by distance to the centroid. Since sum_q |p - q| >= n |p - c|,
    // the scan can stop once that bound exceeds the best sum found.
    std::vector<std::pair<double, int>> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double dx = pixels[i].x - cx;
        const double dy = pixels[i].y - cy;
        order[i] = {dx * dx + dy * dy, i};
    }
    std::sort(order.begin(), order.end());

    double best = std::numeric_limits<double>::infinity();
    Point bp = pixels[0];
    for (const auto& [d2, i] : order) {
        const double bound = n * std::sqrt(d2);
        if (bound > best * (1.0 + 1e-9) + 1e-9) break;
        const Point p = pixels[i];
        double s = 0.0;
        const double abort = best * (1.0 + 1e-9) + 1e-9;
        bool aborted = false;
        for (int j = 0; j < n; ++j) {
            const int dx = pixels[j].x - p.x;
            const int dy = pixels[j].y - p.y;
            s += root[static_cast<std::size_t>(dx * dx + dy * dy)];
            if ((j & 63) == 63 && s > abort) {
                aborted = true;
                break;
            }
        }
        if (aborted) continue;
        if (better(s, p, best, bp)) {
            best = s;
            bp = p;
        }
    }
    return bp;
}

LabelFrame watershed(const RealRaster& landscape, const LabelFrame& seeds, double mask_threshold) {
    if (!landscape.same_shape(seeds.raster)) throw DataError("watershed: landscape and seeds differ in size");
    const int w = landscape.width();
    const int h = landscape.height();
    LabelFrame out(w, h, seeds.frame_index);
    auto& lab = out.raster;

    struct Entry {
        double value;
        int index;
        std::uint64_t seq;
        Label label;
    };
    auto cmp = [](const Entry& a, const Entry& b) {
        if (a.value != b.value) return a.value < b.value;
        if (a.index != b.index) return a.index > b.index;
        return a.seq > b.seq;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
    std::uint64_t seq = 0;
    for (int i = 0; i < static_cast<int>(landscape.size()); ++i) {
        const Label s = seeds.raster[i];
        if (s != 0 && landscape[i] > mask_threshold) pq.push({landscape[i], i, seq++, s});
    }
    while (!pq.empty()) {
        const Entry e = pq.top();
        pq.pop();
        if (lab[e.index] != 0) continue;
        lab[e.index] = e.label;
        const int x = e.index % w;
        const int y = e.index / w;
        for (int d = 0; d < 4; ++d) {
            const int nx = x + kDx4[d];
            const int ny = y + kDy4[d];
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const int n = ny * w + nx;
            if (lab[n] != 0 || !(landscape[n] > mask_threshold)) continue;
            pq.push({landscape[n], n, seq++, e.label});
        }
    }
    return out;
}

LabelFrame regional_maxima(const RealRaster& landscape, double mask_threshold) {
    const int w = landscape.width();
    const int h = landscape.height();
    LabelFrame out(w, h, 0);
    std::vector<char> visited(landscape.size(), 0);
    std::vector<int> plateau;
    Label next = 0;
    for (int i = 0; i < static_cast<int>(landscape.size()); ++i) {
        if (visited[i] || !(landscape[i] > mask_threshold)) continue;
        const double v = landscape[i];
        plateau.clear();
        plateau.push_back(i);
        visited[i] = 1;
        bool is_max = true;
        for (std::size_t k = 0; k < plateau.size(); ++k) {
            const int cur = plateau[k];
            const int x = cur % w;
            const int y = cur / w;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const int n = ny * w + nx;
                    const double nv = landscape[n];
                    if (nv > v) {
                        is_max = false;
                    } else if (nv == v && !visited[n]) {
                        visited[n] = 1;
                        plateau.push_back(n);
                    }
                }
        }
        if (!is_max) continue;
        ++next;
        for (int p : plateau) out.raster[p] = next;
    }
    return out;
}

namespace {

void fill_shape_properties(CellRegion& r, int width, int height, MedoidMetric metric) {
    const int n = static_cast<int>(r.pixels.size());
    r.area = n;
    double sx = 0.0, sy = 0.0;
    r.touches_edge = false;
    for (const Point& p : r.pixels) {
        sx += p.x;
        sy += p.y;
        if (p.x == 0 || p.y == 0 || p.x == width - 1 || p.y == height - 1) r.touches_edge = true;
    }
    r.centroid = {sx / n, sy / n};
    double mxx = 0.0, myy = 0.0, mxy = 0.0;
    for (const Point& p : r.pixels) {
        const double dx = p.x - r.centroid.x;
        const double dy = p.y - r.centroid.y;
        mxx += dx * dx;
        myy += dy * dy;
        mxy += dx * dy;
    }
    mxx /= n;
    myy /= n;
    mxy /= n;
    const double tr = mxx + myy;
    const double disc = std::sqrt(std::max(0.0, (mxx - myy) * (mxx - myy) / 4.0 + mxy * mxy));
    const double l1 = tr / 2.0 + disc;
    const double l2 = std::max(0.0, tr / 2.0 - disc);
    r.major_axis_length = 4.0 * std::sqrt(l1);
    r.eccentricity = l1 > 1e-12 ? std::sqrt(std::clamp(1.0 - l2 / l1, 0.0, 1.0)) : 0.0;
    double angle = disc > 1e-12 ? 0.5 * std::atan2(2.0 * mxy, mxx - myy) : 0.0;
    if (angle < 0.0) angle += M_PI;
    if (angle >= M_PI) angle -= M_PI;
    r.major_axis_angle = angle;

    LocalGrid grid(r.pixels);
    r.contour.clear();
    for (const Point& p : r.pixels) {
        for (int d = 0; d < 4; ++d)
            if (grid.at(p.x + kDx4[d], p.y + kDy4[d]) < 0) {
                r.contour.push_back(p);
                break;
            }
    }
    r.medoid = compute_medoid(r.pixels, metric);
}

}  // namespace

CellRegion make_region(std::vector<Point> pixels, Label label, int frame_index, int width, int height,
                       MedoidMetric metric) {
    if (pixels.empty()) throw DataError("make_region: empty pixel set");
    std::sort(pixels.begin(), pixels.end(),
              [](Point a, Point b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
    CellRegion r;
    r.label = label;
    r.frame_index = frame_index;
    r.pixels = std::move(pixels);
    fill_shape_properties(r, width, height, metric);
    return r;
}

std::vector<CellRegion> region_properties(const LabelFrame& frame, MedoidMetric metric) {
    const auto& lab = frame.raster;
    const Label maxl = frame.max_label();
    std::vector<int> count(static_cast<std::size_t>(maxl) + 1, 0);
    for (Label v : lab.values())
        if (v) ++count[v];
    std::vector<CellRegion> regions;
    std::vector<int> slot(static_cast<std::size_t>(maxl) + 1, -1);
    for (Label id = 1; id <= maxl; ++id) {
        if (count[id] == 0) continue;
        slot[id] = static_cast<int>(regions.size());
        CellRegion r;
        r.label = id;
        r.frame_index = frame.frame_index;
        r.pixels.reserve(static_cast<std::size_t>(count[id]));
        regions.push_back(std::move(r));
    }
    for (int y = 0; y < lab.height(); ++y)
        for (int x = 0; x < lab.width(); ++x)
            if (Label v = lab(x, y)) regions[slot[v]].pixels.push_back({x, y});
    for (auto& r : regions) fill_shape_properties(r, lab.width(), lab.height(), metric);
    return regions;
}

double contour_distance(const CellRegion& a, const CellRegion& b) {
    double best2 = std::numeric_limits<double>::infinity();
    for (const Point& p : a.contour)
        for (const Point& q : b.contour) {
            const double dx = p.x - q.x;
            const double dy = p.y - q.y;
            best2 = std::min(best2, dx * dx + dy * dy);
        }
    return std::sqrt(best2);
}

RealRaster gaussian_blur(const RealRaster& in, double sigma) {
    if (!(sigma > 0.0)) return in;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        total += k[i + radius];
    }
    for (double& v : k) v /= total;
    const int w = in.width();
    const int h = in.height();
    RealRaster tmp(w, h, 0.0);
    RealRaster out(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = -radius; i <= radius; ++i) s += k[i + radius] * in(std::clamp(x + i, 0, w - 1), y);
            tmp(x, y) = s;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = -radius; i <= radius; ++i) s += k[i + radius] * tmp(x, std::clamp(y + i, 0, h - 1));
            out(x, y) = s;
        }
    return out;
}

RealRaster laplacian(const RealRaster& in) {
    const int w = in.width();
    const int h = in.height();
    RealRaster out(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double c = in(x, y);
            out(x, y) = in(std::max(x - 1, 0), y) + in(std::min(x + 1, w - 1), y) + in(x, std::max(y - 1, 0)) +
                        in(x, std::min(y + 1, h - 1)) - 4.0 * c;
        }
    return out;
}

}  // namespace celltrack
