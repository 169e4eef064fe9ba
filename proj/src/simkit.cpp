#include "celltrack/simkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "celltrack/parallel.hpp"

namespace celltrack {

const char* to_string(CellShape s) { return s == CellShape::rod ? "rod" : "blob"; }

CellShape parse_cell_shape(const std::string& s) {
    if (s == "rod") return CellShape::rod;
    if (s == "blob") return CellShape::blob;
    throw DataError("unknown cell shape '" + s + "' (expected rod or blob)");
}

void SimConfig::validate() const {
    if (width < 8 || height < 8) throw DataError("simulation: grid must be at least 8x8");
    if (n_frames < 1) throw DataError("simulation: n_frames must be >= 1");
    if (n_cells < 0) throw DataError("simulation: n_cells must be >= 0");
    if (!(rod_width >= 2.0) || !(rod_length_mean >= rod_width) || rod_max_length < rod_length_mean)
        throw DataError("simulation: rod dimensions must satisfy 2 <= width <= mean length <= max length");
    if (!(blob_radius_mean >= 2.0)) throw DataError("simulation: blob_radius_mean must be >= 2");
    if (blob_deformation < 0.0 || blob_deformation > 0.3) throw DataError("simulation: blob_deformation must lie in [0, 0.3]");
    if (rod_length_sd < 0.0 || blob_radius_sd < 0.0 || speed_sd < 0.0 || speed_mean < 0.0 || growth_rate < 0.0)
        throw DataError("simulation: spreads, speed and growth must be non-negative");
    if (persistence < 0.0 || persistence > 1.0) throw DataError("simulation: persistence must lie in [0, 1]");
    if (division_probability < 0.0 || division_probability > 1.0)
        throw DataError("simulation: division_probability must lie in [0, 1]");
    if (division_min_age < 0) throw DataError("simulation: division_min_age must be >= 0");
    if (edge_margin < 1) throw DataError("simulation: edge_margin must be >= 1");
}

void CorruptionConfig::validate() const {
    auto rate = [](double r, const char* name) {
        if (r < 0.0 || r > 1.0) throw DataError(std::string("corruption: ") + name + " must lie in [0, 1]");
    };
    rate(under_seg_rate, "under_seg_rate");
    rate(over_seg_rate, "over_seg_rate");
    rate(multiplicity_flip_rate, "multiplicity_flip_rate");
    if (proxy_noise_sigma < 0.0 || displacement_jitter_sigma < 0.0 || displacement_capture_radius < 0.0 ||
        contact_distance < 0.0)
        throw DataError("corruption: sigmas, capture radius and contact distance must be non-negative");
}

namespace {

// Hand-rolled draws so streams are identical across standard libraries.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

struct SimCell {
    int id = 0;
    double x = 0.0, y = 0.0;
    double axis = 0.0;     // body orientation
    double heading = 0.0;  // direction of motion
    double length = 0.0;   // rods
    double radius = 0.0;   // blobs
    double harm[4] = {0, 0, 0, 0};
    int age = 0;
};

class World {
public:
    explicit World(const SimConfig& c) : cfg_(c), owner_(c.width, c.height, 0) {}

    std::vector<Point> render(const SimCell& c) const {
        return cfg_.shape == CellShape::rod ? render_rod(c) : render_blob(c);
    }

    // Inside the margin and at Chebyshev distance >= 2 from every other cell.
    bool fits(const std::vector<Point>& px, int self, const std::vector<Point>* also = nullptr) const {
        if (px.empty()) return false;
        const int m = cfg_.edge_margin;
        for (const Point& p : px) {
            if (p.x < m || p.y < m || p.x >= cfg_.width - m || p.y >= cfg_.height - m) return false;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int o = owner_(p.x + dx, p.y + dy);
                    if (o != 0 && o != self) return false;
                }
        }
        if (also) {
            for (const Point& p : px)
                for (const Point& q : *also)
                    if (std::abs(p.x - q.x) <= 1 && std::abs(p.y - q.y) <= 1) return false;
        }
        return true;
    }

    void paint(const std::vector<Point>& px, int value) {
        for (const Point& p : px) owner_(p.x, p.y) = value;
    }

private:
    std::vector<Point> render_rod(const SimCell& c) const {
        const double r = cfg_.rod_width / 2.0;
        const double h = std::max(0.0, (c.length - cfg_.rod_width) / 2.0);
        const double ux = std::cos(c.axis), uy = std::sin(c.axis);
        const double ext = h + r + 1.0;
        std::vector<Point> out;
        const int x0 = static_cast<int>(std::floor(c.x - ext)), x1 = static_cast<int>(std::ceil(c.x + ext));
        const int y0 = static_cast<int>(std::floor(c.y - ext)), y1 = static_cast<int>(std::ceil(c.y + ext));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double px = x - c.x, py = y - c.y;
                const double t = std::clamp(px * ux + py * uy, -h, h);
                const double dx = px - t * ux, dy = py - t * uy;
                if (dx * dx + dy * dy <= r * r) out.push_back({x, y});
            }
        if (!inside_grid(out)) return {};
        return out;
    }

    std::vector<Point> render_blob(const SimCell& c) const {
        const double rmax = c.radius * (1.0 + std::fabs(c.harm[0]) + std::fabs(c.harm[2])) + 1.0;
        const int cx = static_cast<int>(std::lround(c.x)), cy = static_cast<int>(std::lround(c.y));
        const int x0 = static_cast<int>(std::floor(c.x - rmax)), x1 = static_cast<int>(std::ceil(c.x + rmax));
        const int y0 = static_cast<int>(std::floor(c.y - rmax)), y1 = static_cast<int>(std::ceil(c.y + rmax));
        const int w = x1 - x0 + 1, h = y1 - y0 + 1;
        std::vector<char> in(static_cast<std::size_t>(w) * h, 0);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double px = x - c.x, py = y - c.y;
                const double th = std::atan2(py, px) - c.axis;
                const double rr = c.radius * (1.0 + c.harm[0] * std::cos(2.0 * th + c.harm[1]) +
                                              c.harm[2] * std::cos(3.0 * th + c.harm[3]));
                if (px * px + py * py <= rr * rr) in[static_cast<std::size_t>(y - y0) * w + (x - x0)] = 1;
            }
        auto at = [&](int x, int y) -> char& { return in[static_cast<std::size_t>(y - y0) * w + (x - x0)]; };
        if (cx < x0 || cx > x1 || cy < y0 || cy > y1 || !at(cx, cy)) return {};
        // keep the 4-connected component holding the center
        std::vector<Point> out, stack{{cx, cy}};
        at(cx, cy) = 2;
        while (!stack.empty()) {
            const Point p = stack.back();
            stack.pop_back();
            out.push_back(p);
            const int nx[4] = {p.x - 1, p.x + 1, p.x, p.x};
            const int ny[4] = {p.y, p.y, p.y - 1, p.y + 1};
            for (int k = 0; k < 4; ++k) {
                if (nx[k] < x0 || nx[k] > x1 || ny[k] < y0 || ny[k] > y1 || at(nx[k], ny[k]) != 1) continue;
                at(nx[k], ny[k]) = 2;
                stack.push_back({nx[k], ny[k]});
            }
        }
        std::sort(out.begin(), out.end(), [](Point a, Point b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
        if (!inside_grid(out)) return {};
        return out;
    }

    bool inside_grid(const std::vector<Point>& px) const {
        for (const Point& p : px)
            if (p.x < 1 || p.y < 1 || p.x >= cfg_.width - 1 || p.y >= cfg_.height - 1) return false;
        return true;
    }

    const SimConfig& cfg_;
    Raster2D<int> owner_;
};

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    return a < 0.0 ? a + 2.0 * M_PI : a;
}

void random_shape(SimCell& c, const SimConfig& cfg, std::mt19937_64& rng) {
    if (cfg.shape == CellShape::rod) {
        c.length = std::clamp(cfg.rod_length_mean + cfg.rod_length_sd * normal(rng), cfg.rod_width, cfg.rod_max_length);
    } else {
        c.radius = std::max(2.0, cfg.blob_radius_mean + cfg.blob_radius_sd * normal(rng));
    }
    c.harm[0] = cfg.blob_deformation * uniform01(rng);
    c.harm[1] = 2.0 * M_PI * uniform01(rng);
    c.harm[2] = 0.5 * cfg.blob_deformation * uniform01(rng);
    c.harm[3] = 2.0 * M_PI * uniform01(rng);
}

double blob_major_axis(const std::vector<Point>& px) {
    double sx = 0, sy = 0;
    for (const Point& p : px) {
        sx += p.x;
        sy += p.y;
    }
    const double n = static_cast<double>(px.size());
    const double cx = sx / n, cy = sy / n;
    double mxx = 0, myy = 0, mxy = 0;
    for (const Point& p : px) {
        mxx += (p.x - cx) * (p.x - cx);
        myy += (p.y - cy) * (p.y - cy);
        mxy += (p.x - cx) * (p.y - cy);
    }
    return 0.5 * std::atan2(2.0 * mxy, mxx - myy);
}

}  // namespace

SimVideo simulate(const SimConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    World world(cfg);
    std::vector<SimCell> cells;
    std::vector<std::vector<Point>> shapes;
    int next_id = 1;

    for (int i = 0; i < cfg.n_cells; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
            SimCell c;
            c.id = next_id;
            c.x = cfg.edge_margin + uniform01(rng) * (cfg.width - 2 * cfg.edge_margin);
            c.y = cfg.edge_margin + uniform01(rng) * (cfg.height - 2 * cfg.edge_margin);
            c.heading = 2.0 * M_PI * uniform01(rng);
            c.axis = cfg.shape == CellShape::rod ? c.heading : 2.0 * M_PI * uniform01(rng);
            random_shape(c, cfg, rng);
            c.age = static_cast<int>(uniform01(rng) * cfg.division_min_age);
            auto px = world.render(c);
            if (!world.fits(px, c.id)) continue;
            world.paint(px, c.id);
            cells.push_back(c);
            shapes.push_back(std::move(px));
            ++next_id;
            placed = true;
        }
        if (!placed)
            throw DataError("simulate: could not place cell " + std::to_string(i + 1) + " of " +
                            std::to_string(cfg.n_cells) + " without overlap");
    }

    SimVideo video;
    std::map<int, Label> prev_label;  // cell id -> label in the previous frame
    std::map<int, std::vector<int>> born_from;  // daughter id -> mother id, for the current frame

    auto record = [&](int t) {
        LabelFrame f(cfg.width, cfg.height, t);
        std::map<int, Label> label;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const Label l = static_cast<Label>(i + 1);
            label[cells[i].id] = l;
            for (const Point& p : shapes[i]) f.raster(p.x, p.y) = l;
        }
        add_frame_nodes(video.graph, region_properties(f));
        if (t > 0) {
            for (const auto& c : cells) {
                const NodeKey to{t, label[c.id]};
                if (auto it = prev_label.find(c.id); it != prev_label.end()) {
                    video.graph.add_edge({t - 1, it->second}, to);
                } else if (auto b = born_from.find(c.id); b != born_from.end()) {
                    video.graph.add_edge({t - 1, prev_label.at(b->second.front())}, to);
                }
            }
        }
        prev_label = label;
        video.frames.push_back(std::move(f));
    };
    record(0);

    const double turn_sd = (1.0 - cfg.persistence) * M_PI;
    for (int t = 1; t < cfg.n_frames; ++t) {
        born_from.clear();
        // motion and growth
        for (std::size_t i = 0; i < cells.size(); ++i) {
            SimCell& c = cells[i];
            world.paint(shapes[i], 0);
            SimCell cand = c;
            cand.heading = wrap_angle(c.heading + turn_sd * normal(rng));
            const double speed = std::max(0.0, cfg.speed_mean + cfg.speed_sd * normal(rng));
            cand.x += speed * std::cos(cand.heading);
            cand.y += speed * std::sin(cand.heading);
            if (cfg.shape == CellShape::rod) {
                cand.axis = cand.heading;
                cand.length = std::min(cfg.rod_max_length, c.length + cfg.growth_rate);
            } else {
                cand.axis = c.axis + 0.05 * normal(rng);
                cand.radius = std::min(1.5 * cfg.blob_radius_mean, c.radius + 0.1 * cfg.growth_rate);
            }
            auto px = world.render(cand);
            if (world.fits(px, c.id)) {
                c = cand;
                shapes[i] = std::move(px);
            } else {
                // blocked: stay, try to grow in place, and turn around
                SimCell grow = c;
                grow.length = cand.length;
                grow.radius = cand.radius;
                auto gpx = world.render(grow);
                if (world.fits(gpx, c.id)) {
                    c = grow;
                    shapes[i] = std::move(gpx);
                }
                c.heading = wrap_angle(c.heading + M_PI * (0.5 + uniform01(rng)));
            }
            ++c.age;
            world.paint(shapes[i], c.id);
        }
        // divisions
        const std::size_t n_before = cells.size();
        std::vector<SimCell> next_cells;
        std::vector<std::vector<Point>> next_shapes;
        std::vector<std::pair<SimCell, std::vector<Point>>> daughters;
        for (std::size_t i = 0; i < n_before; ++i) {
            SimCell c = cells[i];
            bool divided = false;
            if (c.age >= cfg.division_min_age && uniform01(rng) < cfg.division_probability) {
                SimCell d1 = c, d2 = c;
                double ux, uy, offset;
                if (cfg.shape == CellShape::rod) {
                    const double ld = (c.length - 3.0) / 2.0;
                    ux = std::cos(c.axis);
                    uy = std::sin(c.axis);
                    offset = ld / 2.0 + 1.5;
                    d1.length = d2.length = ld;
                    if (ld < cfg.rod_width) offset = -1.0;
                } else {
                    const double a = blob_major_axis(shapes[i]);
                    ux = std::cos(a);
                    uy = std::sin(a);
                    d1.radius = d2.radius = c.radius / std::sqrt(2.0);
                    offset = d1.radius + 1.5;
                    random_shape(d1, cfg, rng);
                    random_shape(d2, cfg, rng);
                    d1.radius = d2.radius = c.radius / std::sqrt(2.0);
                    d1.axis = d2.axis = a + M_PI / 2.0;
                }
                if (offset > 0.0) {
                    d1.x = c.x - offset * ux;
                    d1.y = c.y - offset * uy;
                    d2.x = c.x + offset * ux;
                    d2.y = c.y + offset * uy;
                    d1.heading = wrap_angle(std::atan2(-uy, -ux));
                    d2.heading = wrap_angle(std::atan2(uy, ux));
                    if (cfg.shape == CellShape::rod) {
                        d1.axis = d1.heading;
                        d2.axis = d2.heading;
                    }
                    d1.age = d2.age = 0;
                    world.paint(shapes[i], 0);
                    auto p1 = world.render(d1);
                    auto p2 = world.render(d2);
                    if (world.fits(p1, -1) && world.fits(p2, -1, &p1)) {
                        d1.id = next_id++;
                        d2.id = next_id++;
                        born_from[d1.id] = {c.id};
                        born_from[d2.id] = {c.id};
                        world.paint(p1, d1.id);
                        world.paint(p2, d2.id);
                        daughters.push_back({d1, std::move(p1)});
                        daughters.push_back({d2, std::move(p2)});
                        divided = true;
                    } else {
                        world.paint(shapes[i], c.id);
                    }
                }
            }
            if (!divided) {
                next_cells.push_back(c);
                next_shapes.push_back(std::move(shapes[i]));
            }
        }
        for (auto& [d, px] : daughters) {
            next_cells.push_back(d);
            next_shapes.push_back(std::move(px));
        }
        cells = std::move(next_cells);
        shapes = std::move(next_shapes);
        record(t);
    }
    video.graph.classify_edges();
    for (int t = 0; t < cfg.n_frames; ++t) {
        for (const NodeKey& k : video.graph.nodes_in_frame(t)) {
            TrackNode& n = video.graph.node(k);
            const std::size_t out = video.graph.successors(k).size();
            const std::size_t in = video.graph.predecessors(k).size();
            n.forward = t + 1 == cfg.n_frames ? Multiplicity::one
                        : out == 0             ? Multiplicity::zero
                        : out == 1             ? Multiplicity::one
                                               : Multiplicity::many;
            n.backward = t == 0 ? Multiplicity::one : in == 0 ? Multiplicity::zero : in == 1 ? Multiplicity::one : Multiplicity::many;
        }
    }
    return video;
}

ProxyVideo make_proxy_video(const std::vector<LabelFrame>& frames, const TrackGraph& graph, int threads,
                            MedoidMetric metric) {
    const int n = static_cast<int>(frames.size());
    ProxyVideo out;
    out.frames.resize(frames.size());
    out.pairs.resize(frames.empty() ? 0 : frames.size() - 1);
    std::vector<std::vector<CellRegion>> regions(frames.size());
    parallel_for(n, threads, [&](int i) {
        regions[i] = region_properties(frames[i], metric);
        out.frames[i] = make_proxy_frame(frames[i], regions[i]);
    });
    parallel_for(n - 1, threads, [&](int i) {
        const auto links = links_between(graph, frames[i].frame_index, frames[i + 1].frame_index);
        out.pairs[i] = make_proxy_pair(frames[i], regions[i], frames[i + 1], regions[i + 1], links);
    });
    return out;
}

SimVideo subsample(const SimVideo& video, int factor) {
    if (factor < 1) throw DataError("subsample: factor must be >= 1");
    SimVideo out;
    std::vector<int> kept;
    for (std::size_t t = 0; t < video.frames.size(); t += static_cast<std::size_t>(factor)) {
        LabelFrame f = video.frames[t];
        f.frame_index = static_cast<int>(kept.size());
        kept.push_back(video.frames[t].frame_index);
        add_frame_nodes(out.graph, region_properties(f));
        out.frames.push_back(std::move(f));
    }
    for (std::size_t i = 0; i + 1 < kept.size(); ++i)
        for (const Link& l : links_between(video.graph, kept[i], kept[i + 1]))
            out.graph.add_edge({static_cast<int>(i), l.from}, {static_cast<int>(i + 1), l.to});
    out.graph.classify_edges();
    return out;
}

namespace {

struct Event {
    InjectedKind kind;
    Label a = 0;
    Label b = 0;
};

// The node continues a single track on both sides (no birth, division or end nearby).
bool plain_track(const TrackGraph& g, const NodeKey& k) {
    const auto& pred = g.predecessors(k);
    const auto& succ = g.successors(k);
    return pred.size() == 1 && succ.size() == 1 && g.successors(pred[0]).size() == 1 &&
           g.predecessors(succ[0]).size() == 1;
}

bool bbox_near(const CellRegion& a, const CellRegion& b, double d) {
    auto box = [](const CellRegion& r) {
        int x0 = r.pixels[0].x, x1 = x0, y0 = r.pixels[0].y, y1 = y0;
        for (const Point& p : r.pixels) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        return std::array<int, 4>{x0, y0, x1, y1};
    };
    const auto ba = box(a), bb = box(b);
    const double gx = std::max({0, ba[0] - bb[2], bb[0] - ba[2]});
    const double gy = std::max({0, ba[1] - bb[3], bb[1] - ba[3]});
    return std::hypot(gx, gy) <= d;
}

constexpr double kBridgeRadius = 2.0;

// Applies one frame's events; events that cannot be realized are dropped from `events`.
LabelFrame inject(const LabelFrame& truth, const std::vector<CellRegion>& regions, std::vector<Event>& events) {
    LabelFrame f = truth;
    Label next = truth.max_label();
    std::map<Label, const CellRegion*> by_label;
    for (const auto& r : regions) by_label[r.label] = &r;
    std::vector<Event> applied;
    for (const Event& e : events) {
        if (e.kind == InjectedKind::over_segmentation) {
            const CellRegion& r = *by_label.at(e.a);
            const double ux = std::cos(r.major_axis_angle), uy = std::sin(r.major_axis_angle);
            std::vector<Point> half;
            for (const Point& p : r.pixels)
                if ((p.x - r.medoid.x) * ux + (p.y - r.medoid.y) * uy > 0.0) half.push_back(p);
            if (half.empty() || half.size() == r.pixels.size()) continue;
            LabelFrame trial = f;
            ++next;
            for (const Point& p : half) trial.raster(p.x, p.y) = next;
            // both halves must stay connected
            LabelFrame check(f.width(), f.height(), 0);
            for (const Point& p : r.pixels) check.raster(p.x, p.y) = trial.raster(p.x, p.y);
            if (relabel_components(check).max_label() != 2) {
                --next;
                continue;
            }
            f = std::move(trial);
            applied.push_back(e);
        } else {
            const CellRegion& ra = *by_label.at(e.a);
            const CellRegion& rb = *by_label.at(e.b);
            std::vector<Point> bridge;
            auto near = [&](int x, int y, Label l) {
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        if (f.raster.contains(x + dx, y + dy) && f.raster(x + dx, y + dy) == l) return true;
                return false;
            };
            // The bridge is a small patch around the closest pair of contour pixels.
            double best = std::numeric_limits<double>::infinity();
            double mx = 0.0, my = 0.0;
            for (const Point& p : ra.contour)
                for (const Point& q : rb.contour) {
                    const double d = std::hypot(p.x - q.x, p.y - q.y);
                    if (d < best) {
                        best = d;
                        mx = 0.5 * (p.x + q.x);
                        my = 0.5 * (p.y + q.y);
                    }
                }
            for (const Point& p : ra.contour)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int x = p.x + dx, y = p.y + dy;
                        if (!f.raster.contains(x, y) || f.raster(x, y) != 0) continue;
                        if (std::hypot(x - mx, y - my) > kBridgeRadius) continue;
                        if (near(x, y, e.b)) bridge.push_back({x, y});
                    }
            if (bridge.empty()) continue;
            LabelFrame check(f.width(), f.height(), 0);
            for (const Point& p : ra.pixels) check.raster(p.x, p.y) = 1;
            for (const Point& p : rb.pixels) check.raster(p.x, p.y) = 1;
            for (const Point& p : bridge) check.raster(p.x, p.y) = 1;
            if (relabel_components(check).max_label() != 1) continue;
            for (const Point& p : rb.pixels) f.raster(p.x, p.y) = e.a;
            for (const Point& p : bridge) f.raster(p.x, p.y) = e.a;
            applied.push_back(e);
        }
    }
    events = std::move(applied);
    return f;
}

void one_hot(MultiplicityMap& m, const CellRegion& r, int cat) {
    for (const Point& p : r.pixels) {
        m.p_zero(p.x, p.y) = cat == 0;
        m.p_one(p.x, p.y) = cat == 1;
        m.p_many(p.x, p.y) = cat == 2;
    }
}

int category_at(const MultiplicityMap& m, Point p) {
    if (m.p_one(p.x, p.y) >= m.p_zero(p.x, p.y) && m.p_one(p.x, p.y) >= m.p_many(p.x, p.y)) return 1;
    return m.p_zero(p.x, p.y) >= m.p_many(p.x, p.y) ? 0 : 2;
}

void corrupt_direction(FloatRaster& dx, FloatRaster& dy, MultiplicityMap& mult, const std::vector<CellRegion>& cells,
                       const CorruptionConfig& cfg, std::mt19937_64& rng) {
    for (const auto& r : cells) {
        const Point c = r.medoid;
        double vx = dx(c.x, c.y), vy = dy(c.x, c.y);
        const double len = std::hypot(vx, vy);
        if (cfg.displacement_capture_radius > 0.0 && len > cfg.displacement_capture_radius) {
            // Out of reach: the predictor sees no partner and reports no motion.
            vx = 0.0;
            vy = 0.0;
        }
        if (cfg.displacement_jitter_sigma > 0.0) {
            vx += cfg.displacement_jitter_sigma * normal(rng);
            vy += cfg.displacement_jitter_sigma * normal(rng);
        }
        if (vx != dx(c.x, c.y) || vy != dy(c.x, c.y))
            for (const Point& p : r.pixels) {
                dx(p.x, p.y) = vx;
                dy(p.x, p.y) = vy;
            }
        if (cfg.multiplicity_flip_rate > 0.0 && uniform01(rng) < cfg.multiplicity_flip_rate) {
            const int cat = category_at(mult, c);
            one_hot(mult, r, (cat + 1 + static_cast<int>(uniform01(rng) * 2.0)) % 3);
        }
    }
}

}  // namespace

std::vector<InjectedError> corrupt_proxies(const SimVideo& truth, ProxyVideo& proxies, const CorruptionConfig& cfg,
                                           std::uint64_t seed, int threads) {
    cfg.validate();
    const int n = static_cast<int>(truth.frames.size());
    if (static_cast<int>(proxies.frames.size()) != n || static_cast<int>(proxies.pairs.size()) != std::max(0, n - 1))
        throw DataError("corrupt_proxies: proxy video does not match the ground truth");
    std::vector<std::vector<CellRegion>> regions(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int t) { regions[t] = region_properties(truth.frames[t]); });

    // Choose injection sites sequentially so that a track carries at most one
    // error in any three consecutive frames.
    std::vector<std::vector<Event>> events(static_cast<std::size_t>(n));
    if (cfg.under_seg_rate > 0.0 || cfg.over_seg_rate > 0.0) {
        std::mt19937_64 rng(mix(seed, 0xC0FFEE));
        std::set<NodeKey> involved;
        const TrackGraph& g = truth.graph;
        auto recently_involved = [&](NodeKey k) {
            for (int back = 0; back < 3; ++back) {
                if (involved.count(k)) return true;
                const auto& pred = g.predecessors(k);
                if (pred.size() != 1) return false;
                k = pred[0];
            }
            return false;
        };
        auto eligible = [&](const NodeKey& k) { return plain_track(g, k) && !recently_involved(k); };
        for (int t = 1; t + 1 < n; ++t) {
            const int frame = truth.frames[t].frame_index;
            const auto& rs = regions[t];
            std::set<Label> used;
            for (const auto& r : rs) {
                const NodeKey k{frame, r.label};
                const double u_over = uniform01(rng);
                const double u_under = uniform01(rng);
                if (used.count(r.label) || !eligible(k)) continue;
                if (u_over < cfg.over_seg_rate) {
                    events[t].push_back({InjectedKind::over_segmentation, r.label, 0});
                    used.insert(r.label);
                    involved.insert(k);
                    continue;
                }
                if (u_under >= cfg.under_seg_rate) continue;
                const CellRegion* partner = nullptr;
                double best = cfg.contact_distance;
                for (const auto& o : rs) {
                    if (o.label == r.label || used.count(o.label) || !bbox_near(r, o, cfg.contact_distance)) continue;
                    if (!eligible({frame, o.label})) continue;
                    const double d = contour_distance(r, o);
                    if (d <= best) {
                        if (partner && d == best && o.label > partner->label) continue;
                        best = d;
                        partner = &o;
                    }
                }
                if (!partner) continue;
                events[t].push_back({InjectedKind::under_segmentation, r.label, partner->label});
                used.insert(r.label);
                used.insert(partner->label);
                involved.insert(k);
                involved.insert({frame, partner->label});
            }
        }
    }

    parallel_for(n, threads, [&](int t) {
        if (!events[t].empty()) {
            const LabelFrame f = inject(truth.frames[t], regions[t], events[t]);
            proxies.frames[t] = make_proxy_frame(f);
        }
        if (cfg.proxy_noise_sigma > 0.0) {
            std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(2 * t + 1)));
            for (auto& v : proxies.frames[t].edm.values()) v += cfg.proxy_noise_sigma * normal(rng);
            for (auto& v : proxies.frames[t].gdcm.values()) v += cfg.proxy_noise_sigma * normal(rng);
        }
    });
    const bool pair_noise =
        cfg.displacement_jitter_sigma > 0.0 || cfg.multiplicity_flip_rate > 0.0 || cfg.displacement_capture_radius > 0.0;
    if (pair_noise) {
        parallel_for(n - 1, threads, [&](int i) {
            std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(2 * i + 2)));
            ProxyPair& p = proxies.pairs[i];
            corrupt_direction(p.fwd_dx, p.fwd_dy, p.fwd_mult, regions[i], cfg, rng);
            corrupt_direction(p.bwd_dx, p.bwd_dy, p.bwd_mult, regions[i + 1], cfg, rng);
        });
    }

    std::vector<InjectedError> out;
    for (int t = 0; t < n; ++t)
        for (const Event& e : events[t]) {
            InjectedError ie;
            ie.frame = truth.frames[t].frame_index;
            ie.kind = e.kind;
            ie.labels = e.kind == InjectedKind::under_segmentation ? std::vector<Label>{e.a, e.b} : std::vector<Label>{e.a};
            out.push_back(ie);
        }
    return out;
}

}  // namespace celltrack
