#include "celltrack/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "celltrack/parallel.hpp"
#include "celltrack/tracker.hpp"

namespace celltrack {

void CorrectionParams::validate() const {
    if (!(contact_distance >= 0.0)) throw DataError("correction: contact_distance must be >= 0");
    if (!(alignment_angle_max >= 0.0)) throw DataError("correction: alignment_angle_max must be >= 0");
    if (!(rod_axis_min_eccentricity >= 0.0 && rod_axis_min_eccentricity <= 1.0))
        throw DataError("correction: rod_axis_min_eccentricity must lie in [0, 1]");
    if (max_rounds < 1) throw DataError("correction: max_rounds must be >= 1");
}

std::vector<SuspectStar> find_suspect_links(const TrackGraph& graph) {
    std::vector<SuspectStar> out;
    for (const auto& [k, node] : graph.nodes()) {
        const auto& pred = graph.predecessors(k);
        if (pred.size() >= 2) {
            bool confirmed = node.backward == Multiplicity::many;
            for (const NodeKey& p : pred) confirmed = confirmed && graph.node(p).forward == Multiplicity::one;
            if (!confirmed) out.push_back({StarKind::merge, k, pred});
        }
        const auto& succ = graph.successors(k);
        if (succ.size() >= 2) {
            bool confirmed = node.forward == Multiplicity::many;
            for (const NodeKey& s : succ) confirmed = confirmed && graph.node(s).backward == Multiplicity::one;
            if (!confirmed) out.push_back({StarKind::split, k, succ});
        }
    }
    auto key = [](const SuspectStar& s) {
        const int frame = s.kind == StarKind::merge ? s.hub.frame - 1 : s.hub.frame;
        return std::tuple(frame, s.hub.label, static_cast<int>(s.kind));
    };
    std::stable_sort(out.begin(), out.end(), [&](const SuspectStar& a, const SuspectStar& b) { return key(a) < key(b); });
    return out;
}

VideoState::VideoState(std::vector<LabelFrame> f, TrackGraph g, const ProxyVideo& p, int threads)
    : frames(std::move(f)), graph(std::move(g)), proxies(&p) {
    if (p.pairs.size() + 1 != frames.size() && !frames.empty())
        throw DataError("correction: " + std::to_string(frames.size()) + " frames need " +
                        std::to_string(frames.size() - 1) + " proxy pairs, got " + std::to_string(p.pairs.size()));
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (frames[i].frame_index != frames[i - 1].frame_index + 1)
            throw DataError("correction: frame indices must be consecutive");
    regions.resize(frames.size());
    parallel_for(static_cast<int>(frames.size()), threads, [&](int i) { regions[i] = region_properties(frames[i]); });
}

int VideoState::position(int frame_index) const {
    const int pos = frames.empty() ? -1 : frame_index - frames.front().frame_index;
    if (pos < 0 || pos >= static_cast<int>(frames.size()))
        throw DataError("correction: frame " + std::to_string(frame_index) + " is outside the video");
    return pos;
}

const CellRegion& VideoState::region(const NodeKey& k) const {
    const auto& rs = regions[position(k.frame)];
    auto it = std::lower_bound(rs.begin(), rs.end(), k.label,
                               [](const CellRegion& r, Label l) { return r.label < l; });
    if (it == rs.end() || it->label != k.label)
        throw DataError("correction: no cell " + std::to_string(k.label) + " at frame " + std::to_string(k.frame));
    return *it;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smallest difference between two undirected axis angles.
double axis_difference(double a, double b) {
    double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

bool aligned(const CellRegion& a, const CellRegion& b, const CorrectionParams& p) {
    std::vector<double> axes;
    if (a.eccentricity >= p.rod_axis_min_eccentricity) axes.push_back(a.major_axis_angle);
    if (b.eccentricity >= p.rod_axis_min_eccentricity) axes.push_back(b.major_axis_angle);
    if (axes.empty()) return true;
    if (axes.size() == 2 && axis_difference(axes[0], axes[1]) > p.alignment_angle_max) return false;
    double sx = 0.0, sy = 0.0;
    for (double t : axes) {
        sx += std::cos(2.0 * t);
        sy += std::sin(2.0 * t);
    }
    const double axis = 0.5 * std::atan2(sy, sx);
    const double vx = b.centroid.x - a.centroid.x, vy = b.centroid.y - a.centroid.y;
    if (vx == 0.0 && vy == 0.0) return true;
    return axis_difference(std::atan2(vy, vx), axis) <= p.alignment_angle_max;
}

bool touching(const CellRegion& a, const CellRegion& b, const CorrectionParams& p) {
    if (contour_distance(a, b) > p.contact_distance) return false;
    return !p.rod_mode || aligned(a, b, p);
}

bool union_connected(const LabelFrame& frame, const std::vector<const CellRegion*>& cells) {
    std::set<Label> members;
    std::size_t total = 0;
    for (const CellRegion* c : cells) {
        members.insert(c->label);
        total += c->pixels.size();
    }
    if (cells.empty() || cells.front()->pixels.empty()) return false;
    std::set<int> seen;
    std::vector<Point> stack{cells.front()->pixels.front()};
    seen.insert(frame.raster.index(stack.back().x, stack.back().y));
    static constexpr int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        for (int d = 0; d < 4; ++d) {
            const int x = p.x + dx[d], y = p.y + dy[d];
            if (!frame.raster.contains(x, y) || !members.count(frame.raster(x, y))) continue;
            if (seen.insert(frame.raster.index(x, y)).second) stack.push_back({x, y});
        }
    }
    return seen.size() == total;
}

std::vector<Label> labels_of(const std::vector<NodeKey>& keys) {
    std::vector<Label> out;
    for (const NodeKey& k : keys) out.push_back(k.label);
    std::sort(out.begin(), out.end());
    return out;
}

// Walks the spokes' tracks away from the hub (backward for merge stars, forward
// for split stars) while they stay distinct. Returns the walked frames; sets
// `apart` when some frame fails the contact test.
std::vector<std::vector<NodeKey>> walk_stretch(const std::vector<NodeKey>& spokes, bool backward,
                                               const VideoState& s, const CorrectionParams& p, bool& apart) {
    std::vector<std::vector<NodeKey>> stretch;
    std::vector<NodeKey> cur = spokes;
    apart = false;
    while (true) {
        std::vector<const CellRegion*> cells;
        for (const NodeKey& k : cur) cells.push_back(&s.region(k));
        if (!in_contact(cells, p)) {
            apart = true;
            return stretch;
        }
        stretch.push_back(cur);
        std::vector<NodeKey> next;
        for (const NodeKey& k : cur) {
            const auto& nb = backward ? s.graph.predecessors(k) : s.graph.successors(k);
            if (nb.size() != 1) return stretch;
            next.push_back(nb[0]);
        }
        std::vector<NodeKey> uniq = next;
        std::sort(uniq.begin(), uniq.end());
        if (std::unique(uniq.begin(), uniq.end()) != uniq.end()) return stretch;
        cur = std::move(next);
    }
}

EditScript merge_script(const std::vector<std::vector<NodeKey>>& stretch, const VideoState& s, const char* reason) {
    EditScript out;
    for (const auto& keys : stretch) {
        std::vector<const CellRegion*> cells;
        for (const NodeKey& k : keys) cells.push_back(&s.region(k));
        if (!union_connected(s.frames[s.position(keys.front().frame)], cells)) break;
        out.edits.push_back({EditAction::merge, keys.front().frame, labels_of(keys), 1, {}, reason});
    }
    if (out.edits.empty()) out.error = "cells in contact but not adjacent";
    return out;
}

// Local re-tracking between `cells_a` (frame a) and `cells_b` (frame b) must
// form a one-to-one correspondence.
bool one_to_one(const std::vector<CellRegion>& cells_a, const LabelFrame& frame_a, const std::vector<CellRegion>& cells_b,
                const LabelFrame& frame_b, const ProxyPair& pair) {
    auto links = forward_track(cells_a, frame_b, pair);
    const auto back = backward_track(cells_b, frame_a, pair, links);
    links.insert(links.end(), back.begin(), back.end());
    std::set<Label> a, b;
    for (const auto& c : cells_a) a.insert(c.label);
    for (const auto& c : cells_b) b.insert(c.label);
    std::map<Label, int> out_deg, in_deg;
    for (const Link& l : links) {
        const bool fa = a.count(l.from) != 0, fb = b.count(l.to) != 0;
        if (fa != fb) return false;  // a fragment links outside the star
        if (!fa) continue;
        ++out_deg[l.from];
        ++in_deg[l.to];
    }
    for (Label l : a)
        if (out_deg[l] != 1) return false;
    for (Label l : b)
        if (in_deg[l] != 1) return false;
    return true;
}

// Splits the hub into one fragment per spoke and checks that re-tracking pairs them up.
EditScript split_script(const SuspectStar& star, const VideoState& s, bool spokes_before, const char* reason) {
    EditScript out;
    const int pos = s.position(star.hub.frame);
    const ProxyFrame& pf = s.proxies->frames[pos];
    if (!pf.edm.same_shape(s.frames[pos].raster)) {
        out.error = "no EDM stored for frame " + std::to_string(star.hub.frame);
        return out;
    }
    const CellRegion& hub = s.region(star.hub);
    const int k = static_cast<int>(star.spokes.size());
    auto parts = split_object(hub, pf.edm, k);
    if (parts.empty()) {
        out.error = "watershed could not produce " + std::to_string(k) + " fragments";
        return out;
    }
    LabelFrame trial = s.frames[pos];
    Label next = trial.max_label();
    std::vector<CellRegion> fragments;
    for (int i = 0; i < k; ++i) {
        const Label l = i == 0 ? hub.label : ++next;
        for (const Point& p : parts[i]) trial.raster(p.x, p.y) = l;
        fragments.push_back(make_region(parts[i], l, star.hub.frame, trial.width(), trial.height()));
    }
    std::vector<CellRegion> spokes;
    for (const NodeKey& sk : star.spokes) spokes.push_back(s.region(sk));
    const int other = s.position(star.spokes.front().frame);
    const bool ok = spokes_before
                        ? one_to_one(spokes, s.frames[other], fragments, trial, s.proxies->pairs[other])
                        : one_to_one(fragments, trial, spokes, s.frames[other], s.proxies->pairs[pos]);
    if (!ok) {
        out.error = "fragments do not relink one-to-one";
        return out;
    }
    Edit e{EditAction::split, star.hub.frame, {hub.label}, k, std::move(parts), reason};
    out.edits.push_back(std::move(e));
    return out;
}

}  // namespace

bool in_contact(const std::vector<const CellRegion*>& cells, const CorrectionParams& params) {
    const int n = static_cast<int>(cells.size());
    if (n <= 1) return true;
    std::vector<int> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int i) { return comp[i] == i ? i : comp[i] = find(comp[i]); };
    int groups = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (find(i) == find(j)) continue;
            if (!touching(*cells[i], *cells[j], params)) continue;
            comp[find(i)] = find(j);
            --groups;
        }
    return groups == 1;
}

EditScript resolve_merge_star(const SuspectStar& star, const VideoState& state, const CorrectionParams& params) {
    bool apart = false;
    const auto stretch = walk_stretch(star.spokes, true, state, params, apart);
    if (!apart) return merge_script(stretch, state, "sources in contact over their common past");
    return split_script(star, state, true, "sources seen apart in the past");
}

EditScript resolve_split_star(const SuspectStar& star, const VideoState& state, const CorrectionParams& params) {
    bool apart = false;
    const auto stretch = walk_stretch(star.spokes, false, state, params, apart);
    if (!apart) return merge_script(stretch, state, "targets in contact over their common future");
    return split_script(star, state, false, "targets seen apart in the future");
}

std::vector<std::vector<Point>> split_object(const CellRegion& object, const FloatRaster& edm, int parts) {
    if (parts < 2 || static_cast<int>(object.pixels.size()) < parts) return {};
    int x0 = object.pixels[0].x, x1 = x0, y0 = object.pixels[0].y, y1 = y0;
    for (const Point& p : object.pixels) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const int w = x1 - x0 + 1, h = y1 - y0 + 1;
    Raster2D<std::uint8_t> mask(w, h, 0);
    double lowest = std::numeric_limits<double>::infinity();
    RealRaster land(w, h, 0.0);
    for (const Point& p : object.pixels) {
        mask(p.x - x0, p.y - y0) = 1;
        land(p.x - x0, p.y - y0) = edm(p.x, p.y);
        lowest = std::min(lowest, static_cast<double>(edm(p.x, p.y)));
    }
    const double outside = lowest - 2.0;
    for (std::size_t i = 0; i < land.size(); ++i)
        if (!mask[i]) land[i] = outside;

    // Maxima ranked by dynamics: flood from the top with a union-find; when two
    // basins meet, the lower peak's dynamics is its height above the meeting level.
    std::vector<int> order;
    for (int i = 0; i < static_cast<int>(mask.size()); ++i)
        if (mask[i]) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return land[a] > land[b]; });
    std::vector<int> parent(mask.size(), -1), peak(mask.size(), -1);
    std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
    std::map<int, double> dynamics;  // peak pixel -> dynamics
    auto higher = [&](int pa, int pb) { return land[pa] > land[pb] || (land[pa] == land[pb] && pa < pb); };
    for (int idx : order) {
        const int x = idx % w, y = idx / w;
        std::vector<int> roots;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (!dx && !dy) continue;
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const int n = ny * w + nx;
                if (parent[n] < 0) continue;
                const int r = find(n);
                if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
            }
        if (roots.empty()) {
            parent[idx] = idx;
            peak[idx] = idx;
            dynamics[idx] = std::numeric_limits<double>::infinity();
            continue;
        }
        int win = roots[0];
        for (int r : roots)
            if (higher(peak[r], peak[win])) win = r;
        for (int r : roots) {
            if (r == win) continue;
            dynamics[peak[r]] = land[peak[r]] - land[idx];
            parent[r] = win;
        }
        parent[idx] = win;
    }
    std::vector<int> peaks;
    for (const auto& [px, d] : dynamics)
        if (d > 0.0) peaks.push_back(px);
    std::stable_sort(peaks.begin(), peaks.end(), [&](int a, int b) {
        if (dynamics[a] != dynamics[b]) return dynamics[a] > dynamics[b];
        return higher(a, b);
    });

    LabelFrame seeds(w, h, 0);
    if (static_cast<int>(peaks.size()) >= parts) {
        for (int i = 0; i < parts; ++i) seeds.raster[peaks[i]] = static_cast<Label>(i + 1);
    } else {
        // Erode until the object falls apart into enough cores.
        LabelFrame core(w, h, 0);
        for (std::size_t i = 0; i < mask.size(); ++i) core.raster[i] = mask[i];
        bool found = false;
        while (!found) {
            LabelFrame eroded(w, h, 0);
            bool any = false;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (!core.raster(x, y)) continue;
                    const bool keep = x > 0 && y > 0 && x < w - 1 && y < h - 1 && core.raster(x - 1, y) &&
                                      core.raster(x + 1, y) && core.raster(x, y - 1) && core.raster(x, y + 1);
                    if (keep) {
                        eroded.raster(x, y) = 1;
                        any = true;
                    }
                }
            if (!any) return {};
            core = relabel_components(eroded);
            const Label n = core.max_label();
            if (static_cast<int>(n) < parts) {
                for (auto& v : core.raster.values()) v = v ? 1 : 0;
                continue;
            }
            std::vector<int> size(n + 1, 0);
            for (Label v : core.raster.values()) ++size[v];
            std::vector<Label> ids(n);
            std::iota(ids.begin(), ids.end(), 1);
            std::stable_sort(ids.begin(), ids.end(), [&](Label a, Label b) { return size[a] > size[b]; });
            std::map<Label, Label> keep;
            for (int i = 0; i < parts; ++i) keep[ids[i]] = static_cast<Label>(i + 1);
            for (std::size_t i = 0; i < core.raster.size(); ++i) {
                auto it = keep.find(core.raster[i]);
                seeds.raster[i] = it == keep.end() ? 0 : it->second;
            }
            found = true;
        }
    }
    const LabelFrame ws = watershed(land, seeds, outside + 1.0);
    std::vector<std::vector<Point>> out(static_cast<std::size_t>(parts));
    for (const Point& p : object.pixels) {
        const Label l = ws.raster(p.x - x0, p.y - y0);
        if (l == 0) return {};
        out[l - 1].push_back(p);
    }
    for (const auto& f : out)
        if (f.empty()) return {};
    return out;
}

std::vector<Edit> apply_corrections(VideoState& state, const std::vector<Edit>& edits) {
    std::set<NodeKey> touched;
    std::vector<Edit> skipped;
    std::set<int> positions;
    for (const Edit& e : edits) {
        bool clash = false;
        for (Label l : e.labels) clash = clash || touched.count({e.frame, l});
        if (clash) {
            skipped.push_back(e);
            continue;
        }
        const int pos = state.position(e.frame);
        LabelFrame& f = state.frames[pos];
        if (e.action == EditAction::merge) {
            const Label keep = *std::min_element(e.labels.begin(), e.labels.end());
            for (Label l : e.labels) {
                if (l == keep) continue;
                for (const Point& p : state.region({e.frame, l}).pixels) f.raster(p.x, p.y) = keep;
            }
        } else {
            std::vector<std::vector<Point>> parts = e.fragments;
            if (parts.empty()) {
                const auto& edm = state.proxies->frames[pos].edm;
                parts = split_object(state.region({e.frame, e.labels.front()}), edm, e.parts);
            }
            if (parts.empty()) {
                skipped.push_back(e);
                continue;
            }
            Label next = f.max_label();
            for (std::size_t i = 1; i < parts.size(); ++i) {
                ++next;
                for (const Point& p : parts[i]) f.raster(p.x, p.y) = next;
            }
        }
        for (Label l : e.labels) touched.insert({e.frame, l});
        positions.insert(pos);
    }
    for (int pos : positions) {
        LabelFrame& f = state.frames[pos];
        f = relabel_components(f);
        state.regions[pos] = region_properties(f);
        state.graph.remove_frame(f.frame_index);
        add_frame_nodes(state.graph, state.regions[pos]);
    }
    std::set<int> pairs;
    for (int pos : positions) {
        if (pos > 0) pairs.insert(pos - 1);
        if (pos + 1 < static_cast<int>(state.frames.size())) pairs.insert(pos);
    }
    for (int q : pairs)
        track_pair(state.graph, state.regions[q], state.frames[q], state.regions[q + 1], state.frames[q + 1],
                   state.proxies->pairs[q]);
    if (!positions.empty()) state.graph.classify_edges();
    return skipped;
}

CorrectionResult correct_video(std::vector<LabelFrame> frames, TrackGraph graph, const ProxyVideo& proxies,
                               const CorrectionParams& params, int threads) {
    params.validate();
    if (proxies.frames.size() != frames.size())
        throw DataError("correction: " + std::to_string(frames.size()) + " label frames but " +
                        std::to_string(proxies.frames.size()) + " proxy frames");
    VideoState state(std::move(frames), std::move(graph), proxies, threads);
    CorrectionReport report;
    std::set<std::pair<NodeKey, std::vector<NodeKey>>> failed;
    for (int round = 1; round <= params.max_rounds; ++round) {
        const auto stars = find_suspect_links(state.graph);
        std::vector<EditScript> scripts(stars.size());
        parallel_for(static_cast<int>(stars.size()), threads, [&](int i) {
            const SuspectStar& s = stars[i];
            if (failed.count({s.hub, s.spokes})) return;
            scripts[i] = s.kind == StarKind::merge ? resolve_merge_star(s, state, params)
                                                   : resolve_split_star(s, state, params);
        });
        std::vector<Edit> batch;
        std::set<NodeKey> claimed;
        for (std::size_t i = 0; i < stars.size(); ++i) {
            const SuspectStar& s = stars[i];
            if (failed.count({s.hub, s.spokes})) continue;
            const EditScript& sc = scripts[i];
            if (!sc.ok()) {
                failed.insert({s.hub, s.spokes});
                ++report.unresolved;
                std::vector<Label> ls{s.hub.label};
                for (const NodeKey& k : s.spokes) ls.push_back(k.label);
                report.entries.push_back({round, s.hub.frame, ls,
                                          "unresolved", std::string(s.kind == StarKind::merge ? "merge" : "split") +
                                                            " star: " + sc.error});
                continue;
            }
            bool clash = false;
            for (const Edit& e : sc.edits)
                for (Label l : e.labels) clash = clash || claimed.count({e.frame, l});
            if (clash) continue;  // retried next round on the updated graph
            for (const Edit& e : sc.edits) {
                for (Label l : e.labels) claimed.insert({e.frame, l});
                batch.push_back(e);
            }
        }
        if (batch.empty()) break;
        report.rounds = round;
        const auto skipped = apply_corrections(state, batch);
        for (const Edit& e : batch) {
            const bool was_skipped = std::any_of(skipped.begin(), skipped.end(), [&](const Edit& s) {
                return s.frame == e.frame && s.labels == e.labels && s.action == e.action;
            });
            if (was_skipped) {
                report.entries.push_back({round, e.frame, e.labels, "deferred", e.reason});
                continue;
            }
            if (e.action == EditAction::merge)
                ++report.merges;
            else
                ++report.splits;
            report.entries.push_back({round, e.frame, e.labels, e.action == EditAction::merge ? "merge" : "split", e.reason});
        }
        // Edited frames are renumbered, so failures there no longer name the same cells.
        std::set<int> edited;
        for (const Edit& e : batch) edited.insert(e.frame);
        for (auto it = failed.begin(); it != failed.end();) {
            bool stale = edited.count(it->first.frame) != 0;
            for (const NodeKey& k : it->second) stale = stale || edited.count(k.frame);
            it = stale ? failed.erase(it) : std::next(it);
        }
    }
    return {std::move(state.frames), std::move(state.graph), std::move(report)};
}

std::string format_correction_report(const CorrectionReport& report) {
    std::string s = "round,frame,labels,action,reason\n";
    for (const auto& e : report.entries) {
        std::string ls;
        for (std::size_t i = 0; i < e.labels.size(); ++i) ls += (i ? ";" : "") + std::to_string(e.labels[i]);
        s += std::to_string(e.round) + "," + std::to_string(e.frame) + "," + ls + "," + e.action + "," + e.reason + "\n";
    }
    s += "# rounds=" + std::to_string(report.rounds) + " merges=" + std::to_string(report.merges) +
         " splits=" + std::to_string(report.splits) + " unresolved=" + std::to_string(report.unresolved) + "\n";
    return s;
}

}  // namespace celltrack
