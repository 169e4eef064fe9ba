#include "celltrack/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>

namespace celltrack {

void Track::validate() const {
    if (samples.empty()) throw DataError("track " + std::to_string(id) + " has no samples");
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i].frame <= samples[i - 1].frame)
            throw DataError("track " + std::to_string(id) + ": frames must strictly increase (frame " +
                            std::to_string(samples[i].frame) + " after " + std::to_string(samples[i - 1].frame) + ")");
    }
}

std::vector<Track> tracks_from_graph(const TrackGraph& graph) {
    const auto lineage = graph.lineages();
    auto continues = [&](const NodeKey& k) {
        const auto& s = graph.successors(k);
        return s.size() == 1 && graph.predecessors(s.front()).size() == 1;
    };

    std::vector<Track> tracks;
    std::map<NodeKey, int> track_of;  // every node -> its track id
    for (const auto& [key, node] : graph.nodes()) {
        const auto& preds = graph.predecessors(key);
        if (preds.size() == 1 && continues(preds.front())) continue;  // inside a chain
        Track t;
        t.id = static_cast<int>(tracks.size()) + 1;
        t.lineage_id = lineage.at(key);
        NodeKey k = key;
        for (;;) {
            const auto& r = graph.node(k).region;
            t.samples.push_back({k.frame, k.label, r.centroid.x, r.centroid.y, static_cast<double>(r.area),
                                 r.axis_length, r.axis_angle});
            track_of[k] = t.id;
            if (!continues(k)) break;
            k = graph.successors(k).front();
        }
        tracks.push_back(std::move(t));
    }
    for (auto& t : tracks) {
        const NodeKey first{t.samples.front().frame, t.samples.front().label};
        for (const auto& p : graph.predecessors(first)) t.parents.push_back(track_of.at(p));
        std::sort(t.parents.begin(), t.parents.end());
        t.parents.erase(std::unique(t.parents.begin(), t.parents.end()), t.parents.end());
    }
    return tracks;
}

MsdCurve msd(const std::vector<Track>& tracks, int max_lag, double px_size, double dt) {
    if (max_lag < 1) throw DataError("msd: max_lag must be >= 1");
    int longest = 0;
    for (const auto& t : tracks) {
        t.validate();
        longest = std::max(longest, t.duration());
    }
    std::string warning;
    if (max_lag >= longest) {
        warning = "max_lag " + std::to_string(max_lag) + " truncated to " + std::to_string(longest - 1) +
                  " (longest track spans " + std::to_string(longest) + " frames)";
        max_lag = longest - 1;
    }
    std::vector<int> lags;
    for (int l = 1; l <= max_lag; ++l) lags.push_back(l);
    MsdCurve c = msd(tracks, lags, px_size, dt);
    c.warning = warning;
    return c;
}

MsdCurve msd(const std::vector<Track>& tracks, const std::vector<int>& lags, double px_size, double dt) {
    if (tracks.empty()) throw DataError("msd: no tracks");
    if (!(px_size > 0.0) || !(dt > 0.0)) throw DataError("msd: px_size and dt must be positive");
    std::vector<double> sum(lags.size(), 0.0);
    std::vector<long long> n(lags.size(), 0);
    std::vector<int> slot;  // frame offset -> sample index, -1 for gaps
    for (const auto& t : tracks) {
        t.validate();
        const int f0 = t.first_frame();
        slot.assign(static_cast<std::size_t>(t.duration()), -1);
        for (std::size_t i = 0; i < t.samples.size(); ++i) slot[t.samples[i].frame - f0] = static_cast<int>(i);
        const int span = t.duration();
        for (std::size_t li = 0; li < lags.size(); ++li) {
            const int lag = lags[li];
            if (lag < 1) throw DataError("msd: lags must be >= 1");
            double s = 0.0;
            long long cnt = 0;
            for (int o = 0; o + lag < span; ++o) {
                const int i = slot[o], j = slot[o + lag];
                if (i < 0 || j < 0) continue;
                const double dx = t.samples[j].x - t.samples[i].x;
                const double dy = t.samples[j].y - t.samples[i].y;
                s += dx * dx + dy * dy;
                ++cnt;
            }
            sum[li] += s;
            n[li] += cnt;
        }
    }
    MsdCurve c;
    for (std::size_t li = 0; li < lags.size(); ++li) {
        if (n[li] == 0) continue;
        c.lag.push_back(lags[li]);
        c.lag_time.push_back(lags[li] * dt);
        c.msd.push_back(sum[li] / static_cast<double>(n[li]) * px_size * px_size);
        c.samples.push_back(n[li]);
    }
    return c;
}

std::vector<int> log_spaced_lags(int max_lag, int per_decade) {
    if (max_lag < 1 || per_decade < 1) throw DataError("log_spaced_lags: arguments must be >= 1");
    std::vector<int> out;
    const double top = std::log10(static_cast<double>(max_lag));
    const int steps = static_cast<int>(std::ceil(top * per_decade));
    for (int i = 0; i <= steps; ++i) {
        const int l = std::min(max_lag, static_cast<int>(std::lround(std::pow(10.0, top * i / std::max(steps, 1)))));
        if (out.empty() || l > out.back()) out.push_back(l);
    }
    return out;
}

double loglog_slope(const MsdCurve& c, int lag_min, int lag_max) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < c.lag.size(); ++i) {
        if (c.lag[i] < lag_min || c.lag[i] > lag_max || !(c.msd[i] > 0.0)) continue;
        const double x = std::log(c.lag_time[i]), y = std::log(c.msd[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw DataError("loglog_slope: fewer than two points in the lag range");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void SpeedLengthParams::validate() const {
    if (!(bin_size > 0.0)) throw DataError("speed_by_length: bin_size must be positive");
    if (!(px_size > 0.0) || !(dt > 0.0)) throw DataError("speed_by_length: px_size and dt must be positive");
    if (!(normalization_frames > 0.0)) throw DataError("speed_by_length: normalization_frames must be positive");
}

namespace {

struct WeightedStats {
    double w = 0, wx = 0, wxx = 0, ww = 0;
    void add(double x, double weight) {
        w += weight;
        wx += weight * x;
        wxx += weight * x * x;
        ww += weight * weight;
    }
    double mean() const { return w > 0 ? wx / w : 0.0; }
    // Standard error with the effective sample size (sum w)^2 / sum w^2.
    double sem() const {
        if (w <= 0) return 0.0;
        const double n_eff = w * w / ww;
        if (n_eff <= 1.0 + 1e-12) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, wxx / w - m * m) * n_eff / (n_eff - 1.0);
        return std::sqrt(var / n_eff);
    }
};

}  // namespace

std::vector<SpeedLengthBin> speed_by_length(const std::vector<Track>& tracks, const SpeedLengthParams& params) {
    params.validate();
    struct Acc {
        WeightedStats stats;
        double duration = 0;
        int tracks = 0;
    };
    std::map<long long, Acc> bins;
    for (const auto& t : tracks) {
        t.validate();
        if (t.samples.size() < 2) continue;
        double speed = 0, length = 0;
        for (std::size_t i = 1; i < t.samples.size(); ++i) {
            const auto& a = t.samples[i - 1];
            const auto& b = t.samples[i];
            speed += std::hypot(b.x - a.x, b.y - a.y) / ((b.frame - a.frame) * params.dt);
        }
        for (const auto& s : t.samples) length += s.axis_length;
        speed = speed / static_cast<double>(t.samples.size() - 1) * params.px_size;
        length /= static_cast<double>(t.samples.size());
        auto& acc = bins[static_cast<long long>(std::floor(length / params.bin_size))];
        acc.stats.add(speed, params.weight_by_duration ? t.duration() : 1.0);
        acc.duration += t.duration();
        ++acc.tracks;
    }
    std::vector<SpeedLengthBin> out;
    for (const auto& [b, acc] : bins) {
        SpeedLengthBin r;
        r.length_min = static_cast<double>(b) * params.bin_size * params.px_size;
        r.length_max = static_cast<double>(b + 1) * params.bin_size * params.px_size;
        r.mean_speed = acc.stats.mean();
        r.sem = acc.stats.sem();
        r.count = acc.duration / params.normalization_frames;
        r.tracks = acc.tracks;
        out.push_back(r);
    }
    return out;
}

void AngleParams::validate() const {
    if (bins < 1) throw DataError("velocity_axis_angles: bins must be >= 1");
    if (!(px_size > 0.0) || !(dt > 0.0)) throw DataError("velocity_axis_angles: px_size and dt must be positive");
}

AngleHistogram velocity_axis_angles(const std::vector<Track>& tracks, const AngleParams& params) {
    params.validate();
    const double width = 90.0 / params.bins;
    AngleHistogram h;
    h.counts.assign(params.bins, 0);
    std::vector<WeightedStats> speed(params.bins);
    for (int b = 0; b < params.bins; ++b) h.bin_lower.push_back(b * width);

    for (const auto& t : tracks) {
        t.validate();
        const auto& s = t.samples;
        if (s.size() < 2) continue;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto& a = s[i == 0 ? 0 : i - 1];
            const auto& b = s[i + 1 == s.size() ? i : i + 1];
            const double step = (b.frame - a.frame) * params.dt;
            const double vx = (b.x - a.x) / step, vy = (b.y - a.y) / step;
            if (vx == 0.0 && vy == 0.0) {
                ++h.skipped;
                continue;
            }
            double d = std::fmod(std::abs(std::atan2(vy, vx) - s[i].axis_angle), std::numbers::pi);
            if (d > std::numbers::pi / 2) d = std::numbers::pi - d;
            const double deg = d * 180.0 / std::numbers::pi;
            const int bin = std::clamp(static_cast<int>(deg / width), 0, params.bins - 1);
            ++h.counts[bin];
            speed[bin].add(std::hypot(vx, vy) * params.px_size, 1.0);
            ++h.samples;
        }
    }
    for (const auto& w : speed) {
        h.mean_speed.push_back(w.mean());
        h.speed_sem.push_back(w.sem());
    }
    return h;
}

TrackStatistics track_statistics(const std::vector<Track>& tracks, int video_length, int width, int height,
                                 double margin) {
    std::map<int, int> children;
    for (const auto& t : tracks)
        for (int p : t.parents) ++children[p];
    TrackStatistics s;
    for (const auto& t : tracks) {
        t.validate();
        ++s.tracks;
        if (t.first_frame() == 0 && t.last_frame() == video_length - 1 && t.duration() == video_length &&
            static_cast<int>(t.samples.size()) == video_length)
            ++s.complete;
        else
            ++s.incomplete;
        const auto& e = t.samples.back();
        if (e.frame >= video_length - 1) {
            ++s.ends_at_last_frame;
        } else if (children.count(t.id)) {
            ++s.ends_with_children;
        } else if (e.x <= margin || e.y <= margin || (width - 1) - e.x <= margin || (height - 1) - e.y <= margin) {
            ++s.ends_near_edge;
        } else {
            ++s.suspicious_ends;
        }
    }
    return s;
}

namespace {

std::string num(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

std::string format_msd_csv(const MsdCurve& c) {
    std::string s = "lag,lag_time,msd,samples\n";
    for (std::size_t i = 0; i < c.lag.size(); ++i)
        s += std::to_string(c.lag[i]) + "," + num(c.lag_time[i]) + "," + num(c.msd[i]) + "," +
             std::to_string(c.samples[i]) + "\n";
    return s;
}

std::string format_speed_csv(const std::vector<SpeedLengthBin>& bins) {
    std::string s = "length_min,length_max,mean_speed,sem,count,tracks\n";
    for (const auto& b : bins)
        s += num(b.length_min) + "," + num(b.length_max) + "," + num(b.mean_speed) + "," + num(b.sem) + "," +
             num(b.count) + "," + std::to_string(b.tracks) + "\n";
    return s;
}

std::string format_angle_csv(const AngleHistogram& h) {
    std::string s = "angle_min,count,mean_speed,speed_sem\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        s += num(h.bin_lower[i]) + "," + std::to_string(h.counts[i]) + "," + num(h.mean_speed[i]) + "," +
             num(h.speed_sem[i]) + "\n";
    return s;
}

std::string format_track_statistics_csv(const TrackStatistics& s) {
    return "tracks,complete,incomplete,ends_at_last_frame,ends_with_children,ends_near_edge,suspicious_ends\n" +
           std::to_string(s.tracks) + "," + std::to_string(s.complete) + "," + std::to_string(s.incomplete) + "," +
           std::to_string(s.ends_at_last_frame) + "," + std::to_string(s.ends_with_children) + "," +
           std::to_string(s.ends_near_edge) + "," + std::to_string(s.suspicious_ends) + "\n";
}

}  // namespace celltrack
