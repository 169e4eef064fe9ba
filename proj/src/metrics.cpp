#include "celltrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "celltrack/parallel.hpp"

namespace celltrack {

void MatchParams::validate() const {
    if (mitosis_frame_tolerance < 0) throw DataError("matching: mitosis_frame_tolerance must be >= 0");
}

double MetricsReport::segmentation_error_rate() const {
    return reference_cells ? static_cast<double>(segmentation_errors()) / reference_cells : 0.0;
}

double MetricsReport::link_error_rate() const {
    return reference_links ? static_cast<double>(link_errors()) / reference_links : 0.0;
}

double MetricsReport::incomplete_lineage_rate() const {
    return total_lineages ? static_cast<double>(total_lineages - complete_lineages) / total_lineages : 0.0;
}

FrameMatch match_cells(const LabelFrame& ref, const LabelFrame& res, double absolute_overlap) {
    if (!ref.raster.same_shape(res.raster))
        throw DataError("frame " + std::to_string(ref.frame_index) + ": reference is " + std::to_string(ref.width()) +
                        "x" + std::to_string(ref.height()) + " but result is " + std::to_string(res.width()) + "x" +
                        std::to_string(res.height()));
    struct Acc {
        long n = 0;
        double sx = 0.0, sy = 0.0;
        void add(int x, int y) {
            ++n;
            sx += x;
            sy += y;
        }
        RealPoint mean() const { return {sx / n, sy / n}; }
    };
    std::map<Label, Acc> ra, sa;
    std::map<std::pair<Label, Label>, Acc> ov;
    FrameMatch m;
    m.frame = ref.frame_index;
    const int w = ref.width(), h = ref.height();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Label r = ref.raster(x, y), s = res.raster(x, y);
            const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            if (r) {
                ra[r].add(x, y);
                if (edge) m.ref_edge.insert(r);
            }
            if (s) {
                sa[s].add(x, y);
                if (edge) m.res_edge.insert(s);
            }
            if (r && s) ov[{r, s}].add(x, y);
        }
    for (const auto& [r, a] : ra) {
        m.ref_to_res[r];
        m.ref_centroid[r] = a.mean();
    }
    for (const auto& [s, a] : sa) {
        m.res_to_ref[s];
        m.res_centroid[s] = a.mean();
    }
    for (const auto& [rs, a] : ov) {
        const long min_area = std::min(ra[rs.first].n, sa[rs.second].n);
        if (2 * a.n > min_area || static_cast<double>(a.n) > absolute_overlap) {
            m.ref_to_res[rs.first].push_back(rs.second);
            m.res_to_ref[rs.second].push_back(rs.first);
            m.part_centroid[rs] = a.mean();
        }
    }
    return m;
}

namespace {

bool any_in(const std::vector<Label>& v, const std::set<Label>& s) {
    for (Label l : v)
        if (s.count(l)) return true;
    return false;
}

}  // namespace

SegmentationCounts count_segmentation_errors(const FrameMatch& m, bool edge_exclusion) {
    SegmentationCounts c;
    for (const auto& [r, ss] : m.ref_to_res) {
        const bool excluded = edge_exclusion && (m.ref_edge.count(r) || any_in(ss, m.res_edge));
        if (excluded) continue;
        if (ss.empty()) ++c.false_negatives;
        if (ss.size() > 1) c.over += static_cast<int>(ss.size()) - 1;
    }
    for (const auto& [s, rs] : m.res_to_ref) {
        const bool excluded = edge_exclusion && (m.res_edge.count(s) || any_in(rs, m.ref_edge));
        if (excluded) continue;
        if (rs.empty()) ++c.false_positives;
        if (rs.size() > 1) c.under += static_cast<int>(rs.size()) - 1;
    }
    return c;
}

std::vector<int> linear_assignment(const std::vector<std::vector<double>>& cost) {
    const int rows = static_cast<int>(cost.size());
    if (rows == 0) return {};
    const int cols = static_cast<int>(cost[0].size());
    const bool transpose = rows > cols;
    const int n = transpose ? cols : rows;  // n <= m
    const int m = transpose ? rows : cols;
    auto a = [&](int i, int j) { return transpose ? cost[j][i] : cost[i][j]; };
    // Shortest augmenting path with potentials, 1-based.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> out(rows, -1);
    for (int j = 1; j <= m; ++j) {
        if (!p[j]) continue;
        if (transpose)
            out[j - 1] = p[j] - 1;
        else
            out[p[j] - 1] = j - 1;
    }
    return out;
}

namespace {

struct WNode {
    int side = 0;
    std::vector<Label> refs;
    std::vector<Label> res;
    RealPoint centroid;
    bool alive = true;
};

struct WLink {
    int from = 0, to = 0;
    bool automatic = false;
    bool alive = true;
};

double dist(RealPoint a, RealPoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

class Transformer {
public:
    Transformer(const FrameMatch& at, const FrameMatch& at1, const std::vector<Link>& res_links,
                const std::vector<Link>& ref_links)
        : match_{&at, &at1}, ref_links_(ref_links) {
        std::map<Label, int> idx[2];
        for (int s = 0; s < 2; ++s)
            for (const auto& [label, refs] : match_[s]->res_to_ref) {
                idx[s][label] = static_cast<int>(nodes_.size());
                nodes_.push_back({s, refs, {label}, match_[s]->res_centroid.at(label), true});
            }
        for (const Link& l : res_links) {
            auto a = idx[0].find(l.from), b = idx[1].find(l.to);
            if (a == idx[0].end() || b == idx[1].end())
                throw DataError("result link " + std::to_string(l.from) + "->" + std::to_string(l.to) + " at frame " +
                                std::to_string(at.frame) + " references a missing cell");
            links_.push_back({a->second, b->second, false, true});
        }
    }

    void split(int side) {
        const int n0 = static_cast<int>(nodes_.size());
        for (int n = 0; n < n0; ++n) {
            if (!nodes_[n].alive || nodes_[n].side != side || nodes_[n].refs.size() < 2) continue;
            const WNode whole = nodes_[n];
            nodes_[n].alive = false;
            std::vector<int> parts;
            for (Label r : whole.refs) {
                parts.push_back(static_cast<int>(nodes_.size()));
                nodes_.push_back({side, {r}, whole.res, match_[side]->part_centroid.at({r, whole.res.front()}), true});
            }
            std::vector<int> others;
            for (auto& l : links_) {
                if (!l.alive) continue;
                const int mine = side == 0 ? l.from : l.to;
                if (mine != n) continue;
                l.alive = false;
                others.push_back(side == 0 ? l.to : l.from);
            }
            if (others.empty()) continue;
            auto connect = [&](int part, int other, bool automatic) {
                if (side == 0)
                    links_.push_back({part, other, automatic, true});
                else
                    links_.push_back({other, part, automatic, true});
            };
            auto nearest = [&](RealPoint p, const std::vector<int>& among) {
                int best = among.front();
                for (int c : among)
                    if (dist(p, nodes_[c].centroid) < dist(p, nodes_[best].centroid)) best = c;
                return best;
            };
            if (others.size() == 1) {
                for (int p : parts) connect(p, others.front(), true);
                continue;
            }
            std::vector<std::vector<double>> cost(others.size(), std::vector<double>(parts.size()));
            for (std::size_t i = 0; i < others.size(); ++i)
                for (std::size_t j = 0; j < parts.size(); ++j)
                    cost[i][j] = dist(nodes_[others[i]].centroid, nodes_[parts[j]].centroid);
            const auto assign = linear_assignment(cost);
            std::vector<char> part_used(parts.size(), 0);
            for (std::size_t i = 0; i < others.size(); ++i) {
                if (assign[i] >= 0) {
                    connect(parts[assign[i]], others[i], false);
                    part_used[assign[i]] = 1;
                } else {
                    connect(nearest(nodes_[others[i]].centroid, parts), others[i], true);
                }
            }
            for (std::size_t j = 0; j < parts.size(); ++j)
                if (!part_used[j]) connect(parts[j], nearest(nodes_[parts[j]].centroid, others), true);
        }
    }

    void merge(int side) {
        std::map<Label, std::vector<int>> groups;
        for (int n = 0; n < static_cast<int>(nodes_.size()); ++n)
            if (nodes_[n].alive && nodes_[n].side == side && nodes_[n].refs.size() == 1)
                groups[nodes_[n].refs.front()].push_back(n);
        std::set<Label> ref_linked;
        for (const Link& l : ref_links_) ref_linked.insert(side == 0 ? l.from : l.to);
        for (const auto& [r, members] : groups) {
            if (members.size() < 2) continue;
            WNode merged{side, {r}, {}, match_[side]->ref_centroid.at(r), true};
            const int id = static_cast<int>(nodes_.size());
            std::map<int, bool> other_auto;  // other endpoint -> all links automatic
            for (int mnode : members) {
                nodes_[mnode].alive = false;
                merged.res.insert(merged.res.end(), nodes_[mnode].res.begin(), nodes_[mnode].res.end());
                bool linked = false;
                for (auto& l : links_) {
                    if (!l.alive || (side == 0 ? l.from : l.to) != mnode) continue;
                    l.alive = false;
                    linked = true;
                    const int other = side == 0 ? l.to : l.from;
                    auto it = other_auto.find(other);
                    if (it == other_auto.end())
                        other_auto[other] = l.automatic;
                    else
                        it->second = it->second && l.automatic;
                }
                if (!linked && ref_linked.count(r)) unlinked_.push_back({side, r});
            }
            std::sort(merged.res.begin(), merged.res.end());
            merged.res.erase(std::unique(merged.res.begin(), merged.res.end()), merged.res.end());
            nodes_.push_back(merged);
            for (const auto& [other, automatic] : other_auto) {
                if (side == 0)
                    links_.push_back({id, other, automatic, true});
                else
                    links_.push_back({other, id, automatic, true});
            }
        }
    }

    TransformedPair result() const {
        TransformedPair out;
        std::vector<int> remap(nodes_.size(), -1);
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!nodes_[i].alive) continue;
            remap[i] = static_cast<int>(out.nodes.size());
            const auto& n = nodes_[i];
            out.nodes.push_back({n.side, n.refs.empty() ? 0 : n.refs.front(), n.res, n.centroid});
        }
        for (const auto& l : links_)
            if (l.alive) out.links.push_back({remap[l.from], remap[l.to], l.automatic});
        out.unlinked_fragments = unlinked_;
        return out;
    }

private:
    const FrameMatch* match_[2];
    const std::vector<Link>& ref_links_;
    std::vector<WNode> nodes_;
    std::vector<WLink> links_;
    std::vector<std::pair<int, Label>> unlinked_;
};

}  // namespace

TransformedPair transform_pair(const FrameMatch& at, const FrameMatch& at1, const std::vector<Link>& result_links,
                               const std::vector<Link>& reference_links) {
    Transformer tr(at, at1, result_links, reference_links);
    tr.split(1);
    tr.split(0);
    tr.merge(0);
    tr.merge(1);
    return tr.result();
}

LinkErrors count_link_errors(const TransformedPair& tp, const FrameMatch& at, const FrameMatch& at1,
                             const std::vector<Link>& reference_links, bool edge_exclusion) {
    const FrameMatch* m[2] = {&at, &at1};
    std::set<Link> ref_set(reference_links.begin(), reference_links.end());
    auto ref_excluded = [&](int side, Label r) {
        if (!edge_exclusion) return false;
        if (m[side]->ref_edge.count(r)) return true;
        auto it = m[side]->ref_to_res.find(r);
        return it != m[side]->ref_to_res.end() && any_in(it->second, m[side]->res_edge);
    };
    LinkErrors out;
    std::set<Link> found, fp;
    for (const PairLink& l : tp.links) {
        const PairNode& a = tp.nodes[l.from];
        const PairNode& b = tp.nodes[l.to];
        if (!a.ref || !b.ref) continue;
        const Link key{a.ref, b.ref};
        found.insert(key);
        if (l.automatic || ref_set.count(key)) continue;
        if (edge_exclusion && (ref_excluded(0, a.ref) || ref_excluded(1, b.ref) || any_in(a.res, at.res_edge) ||
                               any_in(b.res, at1.res_edge)))
            continue;
        fp.insert(key);
    }
    out.false_positives.assign(fp.begin(), fp.end());
    for (const Link& l : ref_set) {
        const auto a = at.ref_to_res.find(l.from);
        const auto b = at1.ref_to_res.find(l.to);
        if (a == at.ref_to_res.end() || b == at1.ref_to_res.end() || a->second.empty() || b->second.empty()) continue;
        if (found.count(l) || ref_excluded(0, l.from) || ref_excluded(1, l.to)) continue;
        out.false_negatives.push_back(l);
    }
    for (const auto& [side, r] : tp.unlinked_fragments)
        if (!ref_excluded(side, r)) out.extra_false_negatives.push_back({side, r});
    return out;
}

namespace {

struct ErrorSite {
    bool is_link = false;
    int frame = 0;  ///< cell frame, or first frame of the pair
    std::vector<NodeKey> refs;
};

std::map<int, std::vector<Link>> links_by_frame(const TrackGraph& g) {
    std::map<int, std::vector<Link>> out;
    for (const auto& e : g.edges()) {
        if (e.to.frame != e.from.frame + 1) continue;
        out[e.from.frame].push_back({e.from.label, e.to.label});
    }
    return out;
}

}  // namespace

MetricsReport evaluate(const std::vector<LabelFrame>& ref_frames, const TrackGraph& ref_graph,
                       const std::vector<LabelFrame>& res_frames, const TrackGraph& res_graph,
                       const MatchParams& params, int threads) {
    params.validate();
    if (ref_frames.size() != res_frames.size())
        throw DataError("evaluate: reference has " + std::to_string(ref_frames.size()) + " frames, result has " +
                        std::to_string(res_frames.size()));
    const int n = static_cast<int>(ref_frames.size());
    for (int t = 0; t < n; ++t) {
        if (ref_frames[t].frame_index != res_frames[t].frame_index)
            throw DataError("evaluate: frame indices differ at position " + std::to_string(t));
        if (t > 0 && ref_frames[t].frame_index != ref_frames[t - 1].frame_index + 1)
            throw DataError("evaluate: frames must be consecutive");
    }

    MetricsReport rep;
    rep.edge_exclusion = params.edge_exclusion;
    double c = params.absolute_overlap;
    if (c < 0.0) {
        long area = 0, cells = 0;
        for (const auto& f : ref_frames) {
            std::set<Label> labels;
            for (Label v : f.raster.values())
                if (v) {
                    ++area;
                    labels.insert(v);
                }
            cells += static_cast<long>(labels.size());
        }
        c = cells ? 0.5 * static_cast<double>(area) / static_cast<double>(cells) : 0.0;
    }
    rep.absolute_overlap = c;

    std::vector<FrameMatch> matches(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int t) { matches[t] = match_cells(ref_frames[t], res_frames[t], c); });

    const auto ref_links = links_by_frame(ref_graph);
    const auto res_links = links_by_frame(res_graph);
    static const std::vector<Link> none;
    auto links_at = [](const std::map<int, std::vector<Link>>& m, int f) -> const std::vector<Link>& {
        auto it = m.find(f);
        return it == m.end() ? none : it->second;
    };

    std::vector<LinkErrors> link_errors(static_cast<std::size_t>(std::max(0, n - 1)));
    parallel_for(n - 1, threads, [&](int t) {
        const int f = ref_frames[t].frame_index;
        const auto& rl = links_at(ref_links, f);
        const auto tp = transform_pair(matches[t], matches[t + 1], links_at(res_links, f), rl);
        link_errors[t] = count_link_errors(tp, matches[t], matches[t + 1], rl, params.edge_exclusion);
    });

    std::vector<ErrorSite> sites;
    for (int t = 0; t < n; ++t) {
        const FrameMatch& m = matches[t];
        FrameCounts fc;
        fc.frame = m.frame;
        fc.seg = count_segmentation_errors(m, params.edge_exclusion);
        for (const auto& [r, ss] : m.ref_to_res)
            if (!params.edge_exclusion || !m.ref_edge.count(r)) ++fc.reference_cells;
        rep.false_positive_cells += fc.seg.false_positives;
        rep.false_negative_cells += fc.seg.false_negatives;
        rep.over_segmentations += fc.seg.over;
        rep.under_segmentations += fc.seg.under;
        rep.reference_cells += fc.reference_cells;
        rep.frames.push_back(fc);

        for (const auto& [r, ss] : m.ref_to_res) {
            if (params.edge_exclusion && (m.ref_edge.count(r) || any_in(ss, m.res_edge))) continue;
            if (ss.size() != 1) sites.push_back({false, m.frame, {{m.frame, r}}});
        }
        for (const auto& [s, rs] : m.res_to_ref) {
            if (rs.size() < 2 || (params.edge_exclusion && (m.res_edge.count(s) || any_in(rs, m.ref_edge)))) continue;
            ErrorSite site{false, m.frame, {}};
            for (Label r : rs) site.refs.push_back({m.frame, r});
            sites.push_back(site);
        }
    }
    for (int t = 0; t + 1 < n; ++t) {
        const int f = ref_frames[t].frame_index;
        PairCounts pc;
        pc.frame_a = f;
        pc.frame_b = f + 1;
        const LinkErrors& le = link_errors[t];
        pc.false_positive_links = static_cast<int>(le.false_positives.size());
        pc.false_negative_links = static_cast<int>(le.false_negatives.size() + le.extra_false_negatives.size());
        for (const Link& l : links_at(ref_links, f)) {
            if (params.edge_exclusion && (matches[t].ref_edge.count(l.from) || matches[t + 1].ref_edge.count(l.to)))
                continue;
            ++pc.reference_links;
        }
        rep.false_positive_links += pc.false_positive_links;
        rep.false_negative_links += pc.false_negative_links;
        rep.reference_links += pc.reference_links;
        rep.pairs.push_back(pc);
        for (const Link& l : le.false_positives) sites.push_back({true, f, {{f, l.from}, {f + 1, l.to}}});
        for (const Link& l : le.false_negatives) sites.push_back({true, f, {{f, l.from}, {f + 1, l.to}}});
        for (const auto& [side, r] : le.extra_false_negatives) sites.push_back({true, f, {{f + side, r}}});
    }

    // Lineages and their exclusion.
    const auto lineage = ref_graph.lineages();
    std::set<int> all, excluded, broken;
    for (const auto& [k, id] : lineage) all.insert(id);
    if (params.edge_exclusion)
        for (int t = 0; t < n; ++t)
            for (Label r : matches[t].ref_edge)
                if (auto it = lineage.find({matches[t].frame, r}); it != lineage.end()) excluded.insert(it->second);

    // Division neighbourhoods: mother chain and daughter chains within the tolerance.
    const int tol = params.mitosis_frame_tolerance;
    struct Division {
        int frame;
        std::set<NodeKey> near;
        bool detected = false;
    };
    std::vector<Division> divisions;
    if (tol > 0) {
        for (const auto& [k, node] : ref_graph.nodes()) {
            const auto& succ = ref_graph.successors(k);
            if (succ.size() < 2) continue;
            Division d{k.frame, {}, false};
            NodeKey cur = k;
            for (int i = 0; i <= tol; ++i) {
                d.near.insert(cur);
                const auto& pred = ref_graph.predecessors(cur);
                if (pred.size() != 1) break;
                cur = pred[0];
            }
            for (const NodeKey& s : succ) {
                cur = s;
                for (int i = 0; i <= tol; ++i) {
                    d.near.insert(cur);
                    const auto& next = ref_graph.successors(cur);
                    if (next.size() != 1) break;
                    cur = next[0];
                }
            }
            divisions.push_back(std::move(d));
        }
        std::map<int, int> pos;  // frame index -> position
        for (int t = 0; t < n; ++t) pos[ref_frames[t].frame_index] = t;
        for (const auto& [k, node] : res_graph.nodes()) {
            if (res_graph.successors(k).size() < 2) continue;
            auto p = pos.find(k.frame);
            if (p == pos.end()) continue;
            auto rs = matches[p->second].res_to_ref.find(k.label);
            if (rs == matches[p->second].res_to_ref.end()) continue;
            for (auto& d : divisions) {
                if (d.detected || std::abs(k.frame - d.frame) > tol) continue;
                for (Label r : rs->second)
                    if (d.near.count({k.frame, r})) d.detected = true;
            }
        }
    }
    auto forgiven = [&](const ErrorSite& s) {
        for (const auto& d : divisions) {
            if (!d.detected) continue;
            const bool in_window = s.is_link ? (s.frame >= d.frame - tol && s.frame <= d.frame + tol)
                                             : (s.frame >= d.frame + 1 - tol && s.frame <= d.frame + tol);
            if (!in_window) continue;
            bool all_near = true;
            for (const NodeKey& k : s.refs) all_near = all_near && d.near.count(k);
            if (all_near) return true;
        }
        return false;
    };
    for (const ErrorSite& s : sites) {
        if (forgiven(s)) continue;
        for (const NodeKey& k : s.refs)
            if (auto it = lineage.find(k); it != lineage.end()) broken.insert(it->second);
    }
    for (int id : all) {
        if (excluded.count(id)) continue;
        ++rep.total_lineages;
        if (!broken.count(id)) ++rep.complete_lineages;
    }
    return rep;
}

namespace {
std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}
}  // namespace

std::string format_report(const MetricsReport& r) {
    std::string s;
    auto line = [&](const std::string& k, const std::string& v) { s += k + ": " + v + "\n"; };
    line("reference_cells", std::to_string(r.reference_cells));
    line("reference_links", std::to_string(r.reference_links));
    line("false_positive_cells", std::to_string(r.false_positive_cells));
    line("false_negative_cells", std::to_string(r.false_negative_cells));
    line("over_segmentations", std::to_string(r.over_segmentations));
    line("under_segmentations", std::to_string(r.under_segmentations));
    line("segmentation_errors", std::to_string(r.segmentation_errors()));
    line("segmentation_error_rate", fmt("%.6f", r.segmentation_error_rate()));
    line("false_positive_links", std::to_string(r.false_positive_links));
    line("false_negative_links", std::to_string(r.false_negative_links));
    line("link_errors", std::to_string(r.link_errors()));
    line("link_error_rate", fmt("%.6f", r.link_error_rate()));
    line("complete_lineages", std::to_string(r.complete_lineages));
    line("total_lineages", std::to_string(r.total_lineages));
    line("incomplete_lineage_rate", fmt("%.6f", r.incomplete_lineage_rate()));
    line("absolute_overlap_C", fmt("%.4f", r.absolute_overlap));
    line("edge_exclusion", r.edge_exclusion ? "true" : "false");
    if (r.edge_exclusion)
        s += "note: errors whose reference or result cell touches the raster edge are excluded; other errors of the "
             "same star are kept\n";
    return s;
}

std::string format_report_csv(const MetricsReport& r) {
    std::string s = "scope,frame_a,frame_b,fp_cells,fn_cells,over,under,fp_links,fn_links,reference_cells,"
                     "reference_links,complete_lineages,total_lineages\n";
    auto row = [&](const std::string& scope, const std::string& a, const std::string& b, const std::vector<int>& v) {
        s += scope + "," + a + "," + b;
        for (int x : v) s += "," + std::to_string(x);
        s += "\n";
    };
    row("total", "", "",
        {r.false_positive_cells, r.false_negative_cells, r.over_segmentations, r.under_segmentations,
         r.false_positive_links, r.false_negative_links, r.reference_cells, r.reference_links, r.complete_lineages,
         r.total_lineages});
    for (const auto& f : r.frames)
        s += "frame," + std::to_string(f.frame) + ",," + std::to_string(f.seg.false_positives) + "," +
             std::to_string(f.seg.false_negatives) + "," + std::to_string(f.seg.over) + "," +
             std::to_string(f.seg.under) + ",,," + std::to_string(f.reference_cells) + ",,,\n";
    for (const auto& p : r.pairs)
        s += "pair," + std::to_string(p.frame_a) + "," + std::to_string(p.frame_b) + ",,,,," +
             std::to_string(p.false_positive_links) + "," + std::to_string(p.false_negative_links) + ",," +
             std::to_string(p.reference_links) + ",,\n";
    return s;
}

}  // namespace celltrack
