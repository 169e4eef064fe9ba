#include "celltrack/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace celltrack {

namespace fs = std::filesystem;

namespace {

constexpr std::uint8_t kFplnVersion = 1;

void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(const std::string& b) : b_(b) {}
    std::size_t offset() const { return pos_; }
    void need(std::size_t n, const char* what) const {
        if (b_.size() - pos_ < n)
            throw DataError("FPLN: truncated " + std::string(what) + " at byte offset " + std::to_string(pos_));
    }
    std::uint32_t uint(int bytes, const char* what) {
        need(static_cast<std::size_t>(bytes), what);
        std::uint32_t v = 0;
        for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(bytes);
        return v;
    }
    std::string bytes(std::size_t n, const char* what) {
        need(n, what);
        std::string s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }

private:
    const std::string& b_;
    std::size_t pos_ = 0;
};

std::string num(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

void FloatPlaneFile::add(const std::string& name, const FloatRaster& plane) {
    if (channels.empty() && width == 0) {
        width = plane.width();
        height = plane.height();
    }
    if (plane.width() != width || plane.height() != height) throw DataError("FPLN: channel " + name + " has a different size");
    names.push_back(name);
    channels.push_back(plane.values());
}

FloatRaster FloatPlaneFile::plane(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw DataError("FPLN: missing channel '" + name + "'");
    const auto& c = channels[static_cast<std::size_t>(it - names.begin())];
    FloatRaster r(width, height);
    r.values() = c;
    return r;
}

std::string encode_fpln(const FloatPlaneFile& f) {
    if (f.names.size() != f.channels.size() || f.names.size() > 0xffff) throw DataError("FPLN: bad channel table");
    std::string s = "FPLN";
    s.push_back(static_cast<char>(kFplnVersion));
    put_u32(s, static_cast<std::uint32_t>(f.width));
    put_u32(s, static_cast<std::uint32_t>(f.height));
    put_u16(s, static_cast<std::uint16_t>(f.names.size()));
    for (const auto& n : f.names) {
        if (n.size() > 0xffff) throw DataError("FPLN: channel name too long");
        put_u16(s, static_cast<std::uint16_t>(n.size()));
        s += n;
    }
    const std::size_t plane = static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height);
    s.reserve(s.size() + 4 * plane * f.channels.size());
    for (const auto& c : f.channels) {
        if (c.size() != plane) throw DataError("FPLN: channel size does not match the grid");
        for (float v : c) put_u32(s, std::bit_cast<std::uint32_t>(v));
    }
    return s;
}

FloatPlaneFile decode_fpln(const std::string& bytes) {
    Reader r(bytes);
    if (r.bytes(4, "magic") != "FPLN") throw DataError("FPLN: bad magic at byte offset 0");
    if (const auto v = r.uint(1, "version"); v != kFplnVersion)
        throw DataError("FPLN: unsupported version " + std::to_string(v) + " at byte offset 4");
    FloatPlaneFile f;
    const std::uint32_t w = r.uint(4, "width"), h = r.uint(4, "height");
    if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
        throw DataError("FPLN: bad grid size " + std::to_string(w) + "x" + std::to_string(h) + " at byte offset 5");
    f.width = static_cast<int>(w);
    f.height = static_cast<int>(h);
    const std::uint32_t n = r.uint(2, "channel count");
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t len = r.uint(2, "channel name length");
        f.names.push_back(r.bytes(len, "channel name"));
    }
    const std::size_t plane = static_cast<std::size_t>(w) * h;
    const std::size_t expected = r.offset() + 4 * plane * n;
    if (bytes.size() != expected)
        throw DataError("FPLN: file has " + std::to_string(bytes.size()) + " bytes, header implies " +
                        std::to_string(expected) + " (data starts at byte offset " + std::to_string(r.offset()) + ")");
    for (std::uint32_t c = 0; c < n; ++c) {
        std::vector<float> v(plane);
        for (auto& x : v) x = std::bit_cast<float>(r.uint(4, "channel data"));
        f.channels.push_back(std::move(v));
    }
    return f;
}

std::string encode_label_pgm(const LabelFrame& frame) {
    std::string s = "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n65535\n";
    s.reserve(s.size() + 2 * frame.raster.size());
    for (Label l : frame.raster.values()) {
        if (l > 0xffff)
            throw DataError("label " + std::to_string(l) + " in frame " + std::to_string(frame.frame_index) +
                            " exceeds the 16-bit ceiling of 65535");
        s.push_back(static_cast<char>(l >> 8));
        s.push_back(static_cast<char>(l & 0xff));
    }
    return s;
}

LabelFrame decode_label_pgm(const std::string& b, int frame_index) {
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) {
        throw DataError("PGM: " + what + " at byte offset " + std::to_string(pos));
    };
    auto skip_space = [&] {
        for (;;) {
            while (pos < b.size() && std::isspace(static_cast<unsigned char>(b[pos]))) ++pos;
            if (pos < b.size() && b[pos] == '#') {
                while (pos < b.size() && b[pos] != '\n') ++pos;
                continue;
            }
            return;
        }
    };
    auto read_int = [&] {
        skip_space();
        long v = 0;
        const auto start = pos;
        while (pos < b.size() && std::isdigit(static_cast<unsigned char>(b[pos]))) {
            v = v * 10 + (b[pos++] - '0');
            if (v > 1'000'000) fail("header value too large");
        }
        if (pos == start) fail("expected a number");
        return static_cast<int>(v);
    };
    if (b.size() < 2 || b[0] != 'P' || b[1] != '5') fail("not a binary PGM (P5)");
    pos = 2;
    const int w = read_int(), h = read_int(), maxval = read_int();
    if (w < 1 || h < 1) fail("bad size");
    if (maxval < 1 || maxval > 65535) fail("bad maxval");
    if (pos >= b.size() || !std::isspace(static_cast<unsigned char>(b[pos]))) fail("missing whitespace after header");
    ++pos;
    const int bps = maxval > 255 ? 2 : 1;
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * bps;
    if (b.size() - pos != need)
        fail("expected " + std::to_string(need) + " pixel bytes, found " + std::to_string(b.size() - pos));
    LabelFrame f(w, h, frame_index);
    for (std::size_t i = 0; i < f.raster.size(); ++i) {
        const auto hi = static_cast<unsigned char>(b[pos]);
        f.raster[i] = bps == 2 ? (static_cast<Label>(hi) << 8) | static_cast<unsigned char>(b[pos + 1]) : hi;
        pos += static_cast<std::size_t>(bps);
    }
    return f;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path);
}

namespace {

std::string padded(int v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", v);
    return buf;
}

// Files "<prefix>NNNNN<suffix>" of a directory, by index.
std::map<int, fs::path> indexed_files(const std::string& dir, const std::string& prefix, const std::string& suffix) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::map<int, fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() <= prefix.size() + suffix.size() || name.rfind(prefix, 0) != 0 ||
            name.substr(name.size() - suffix.size()) != suffix)
            continue;
        const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
        int idx = 0;
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (ec != std::errc() || p != digits.data() + digits.size()) continue;
        out[idx] = e.path();
    }
    return out;
}

}  // namespace

void write_label_frames(const std::string& dir, const std::vector<LabelFrame>& frames) {
    fs::create_directories(dir);
    for (const auto& f : frames)
        write_file((fs::path(dir) / ("labels_" + padded(f.frame_index) + ".pgm")).string(), encode_label_pgm(f));
}

std::vector<LabelFrame> read_label_frames(const std::string& dir) {
    const auto files = indexed_files(dir, "labels_", ".pgm");
    if (files.empty()) throw DataError("no labels_*.pgm files in " + dir);
    std::vector<LabelFrame> out;
    for (const auto& [idx, path] : files) {
        if (!out.empty() && idx != out.back().frame_index + 1)
            throw DataError("label frames are not consecutive: " + path.filename().string());
        try {
            out.push_back(decode_label_pgm(read_file(path.string()), idx));
        } catch (const DataError& e) {
            throw DataError(path.string() + ": " + e.what());
        }
        if (!out.front().raster.same_shape(out.back().raster))
            throw DataError(path.string() + ": grid size differs from the first frame");
    }
    return out;
}

std::string proxy_frame_filename(int frame) { return "frame_" + padded(frame) + ".fpln"; }
std::string proxy_pair_filename(int a, int b) { return "pair_" + padded(a) + "_" + padded(b) + ".fpln"; }

FloatPlaneFile proxy_frame_planes(const ProxyFrame& f) {
    FloatPlaneFile p;
    p.add("edm", f.edm);
    p.add("gdcm", f.gdcm);
    return p;
}

ProxyFrame proxy_frame_from_planes(const FloatPlaneFile& f) { return {f.plane("edm"), f.plane("gdcm")}; }

FloatPlaneFile proxy_pair_planes(const ProxyPair& p) {
    FloatPlaneFile f;
    f.add("fwd_dx", p.fwd_dx);
    f.add("fwd_dy", p.fwd_dy);
    f.add("bwd_dx", p.bwd_dx);
    f.add("bwd_dy", p.bwd_dy);
    f.add("fwd_p0", p.fwd_mult.p_zero);
    f.add("fwd_p1", p.fwd_mult.p_one);
    f.add("fwd_pmany", p.fwd_mult.p_many);
    f.add("bwd_p0", p.bwd_mult.p_zero);
    f.add("bwd_p1", p.bwd_mult.p_one);
    f.add("bwd_pmany", p.bwd_mult.p_many);
    return f;
}

ProxyPair proxy_pair_from_planes(const FloatPlaneFile& f) {
    ProxyPair p;
    p.fwd_dx = f.plane("fwd_dx");
    p.fwd_dy = f.plane("fwd_dy");
    p.bwd_dx = f.plane("bwd_dx");
    p.bwd_dy = f.plane("bwd_dy");
    p.fwd_mult.p_zero = f.plane("fwd_p0");
    p.fwd_mult.p_one = f.plane("fwd_p1");
    p.fwd_mult.p_many = f.plane("fwd_pmany");
    p.bwd_mult.p_zero = f.plane("bwd_p0");
    p.bwd_mult.p_one = f.plane("bwd_p1");
    p.bwd_mult.p_many = f.plane("bwd_pmany");
    return p;
}

void write_proxy_video(const std::string& dir, const ProxyVideo& video, int first_frame) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < video.frames.size(); ++i) {
        const int t = first_frame + static_cast<int>(i);
        write_file((fs::path(dir) / proxy_frame_filename(t)).string(), encode_fpln(proxy_frame_planes(video.frames[i])));
    }
    for (std::size_t i = 0; i < video.pairs.size(); ++i) {
        const int t = first_frame + static_cast<int>(i);
        write_file((fs::path(dir) / proxy_pair_filename(t, t + 1)).string(),
                   encode_fpln(proxy_pair_planes(video.pairs[i])));
    }
}

ProxyVideo read_proxy_video(const std::string& dir, int* first_frame) {
    const auto files = indexed_files(dir, "frame_", ".fpln");
    if (files.empty()) throw DataError("no frame_*.fpln files in " + dir);
    ProxyVideo v;
    const int first = files.begin()->first;
    auto load = [](const fs::path& p) {
        try {
            return decode_fpln(read_file(p.string()));
        } catch (const DataError& e) {
            throw DataError(p.string() + ": " + e.what());
        }
    };
    for (const auto& [idx, path] : files) {
        if (idx != first + static_cast<int>(v.frames.size()))
            throw DataError("proxy frames are not consecutive: " + path.filename().string());
        v.frames.push_back(proxy_frame_from_planes(load(path)));
        if (!v.frames.back().edm.same_shape(v.frames.front().edm))
            throw DataError(path.string() + ": grid size differs from the first frame");
    }
    for (std::size_t i = 0; i + 1 < v.frames.size(); ++i) {
        const int t = first + static_cast<int>(i);
        const fs::path p = fs::path(dir) / proxy_pair_filename(t, t + 1);
        if (!fs::exists(p)) throw DataError("missing pair proxy " + p.string());
        v.pairs.push_back(proxy_pair_from_planes(load(p)));
        if (!v.pairs.back().fwd_dx.same_shape(v.frames.front().edm))
            throw DataError(p.string() + ": grid size differs from the frames");
    }
    if (first_frame) *first_frame = first;
    return v;
}

std::string format_tracks_csv(const std::vector<Track>& tracks) {
    std::vector<const Track*> order;
    for (const auto& t : tracks) order.push_back(&t);
    std::sort(order.begin(), order.end(), [](const Track* a, const Track* b) { return a->id < b->id; });
    std::string s = std::string(kTrackCsvHeader) + "\n";
    for (const Track* t : order) {
        std::string parents;
        for (int p : t->parents) parents += (parents.empty() ? "" : ";") + std::to_string(p);
        for (const auto& x : t->samples) {
            s += std::to_string(t->id) + "," + std::to_string(t->lineage_id) + "," + std::to_string(x.frame) + "," +
                 std::to_string(x.label) + "," + num(x.x) + "," + num(x.y) + "," + num(x.area) + "," +
                 num(x.axis_length) + "," + num(x.axis_angle) + "," + parents + "\n";
        }
    }
    return s;
}

namespace {

template <typename T>
T parse_field(const std::string& s, int row, const char* column) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw DataError("track CSV row " + std::to_string(row) + ": bad " + column + " '" + s + "'");
    return v;
}

}  // namespace

std::vector<Track> parse_tracks_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int row = 0;
    auto next_line = [&] {
        if (!std::getline(in, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++row;
        return true;
    };
    if (!next_line() || line != kTrackCsvHeader)
        throw DataError("track CSV row 1: header must be '" + std::string(kTrackCsvHeader) + "'");

    std::map<int, Track> tracks;
    std::map<int, int> first_row;
    std::map<int, std::string> parent_text;
    std::set<std::pair<int, Label>> seen;
    while (next_line()) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() != 10)
            throw DataError("track CSV row " + std::to_string(row) + ": expected 10 fields, found " +
                            std::to_string(f.size()));
        const int id = parse_field<int>(f[0], row, "track_id");
        TrackSample s;
        const int lineage = parse_field<int>(f[1], row, "lineage_id");
        s.frame = parse_field<int>(f[2], row, "frame");
        s.label = parse_field<Label>(f[3], row, "label");
        s.x = parse_field<double>(f[4], row, "x");
        s.y = parse_field<double>(f[5], row, "y");
        s.area = parse_field<double>(f[6], row, "area");
        s.axis_length = parse_field<double>(f[7], row, "axis_len");
        s.axis_angle = parse_field<double>(f[8], row, "axis_angle");
        if (s.label == 0) throw DataError("track CSV row " + std::to_string(row) + ": label 0 is background");
        if (!seen.insert({s.frame, s.label}).second)
            throw DataError("track CSV row " + std::to_string(row) + ": duplicate (frame, label) (" +
                            std::to_string(s.frame) + ", " + std::to_string(s.label) + ")");
        auto [it, fresh] = tracks.try_emplace(id);
        Track& t = it->second;
        if (fresh) {
            t.id = id;
            t.lineage_id = lineage;
            first_row[id] = row;
            parent_text[id] = f[9];
            for (std::size_t a = 0; a < f[9].size();) {
                const auto semi = std::min(f[9].find(';', a), f[9].size());
                t.parents.push_back(parse_field<int>(f[9].substr(a, semi - a), row, "parent_track_id"));
                a = semi + 1;
            }
        } else if (t.lineage_id != lineage || parent_text[id] != f[9]) {
            throw DataError("track CSV row " + std::to_string(row) + ": lineage or parents differ from row " +
                            std::to_string(first_row[id]) + " of track " + std::to_string(id));
        }
        t.samples.push_back(s);
    }
    std::vector<Track> out;
    for (auto& [id, t] : tracks) {
        std::sort(t.samples.begin(), t.samples.end(), [](const auto& a, const auto& b) { return a.frame < b.frame; });
        for (std::size_t i = 1; i < t.samples.size(); ++i)
            if (t.samples[i].frame == t.samples[i - 1].frame)
                throw DataError("track CSV row " + std::to_string(first_row[id]) + ": track " + std::to_string(id) +
                                " has two samples in frame " + std::to_string(t.samples[i].frame));
        for (int p : t.parents) {
            if (!tracks.count(p))
                throw DataError("track CSV row " + std::to_string(first_row[id]) + ": parent track " +
                                std::to_string(p) + " does not exist");
        }
        out.push_back(std::move(t));
    }
    return out;
}

TrackGraph graph_from_tracks(const std::vector<Track>& tracks, const std::vector<LabelFrame>& frames) {
    TrackGraph g;
    for (const auto& f : frames) add_frame_nodes(g, region_properties(f));
    std::map<int, const Track*> by_id;
    for (const auto& t : tracks) {
        t.validate();
        by_id[t.id] = &t;
        for (const auto& s : t.samples)
            if (!g.has_node({s.frame, s.label}))
                throw DataError("track " + std::to_string(t.id) + ": no cell with label " + std::to_string(s.label) +
                                " in frame " + std::to_string(s.frame));
    }
    for (const auto& t : tracks) {
        for (std::size_t i = 1; i < t.samples.size(); ++i)
            g.add_edge({t.samples[i - 1].frame, t.samples[i - 1].label}, {t.samples[i].frame, t.samples[i].label});
        for (int p : t.parents) {
            auto it = by_id.find(p);
            if (it == by_id.end()) throw DataError("track " + std::to_string(t.id) + ": unknown parent " + std::to_string(p));
            const auto& last = it->second->samples.back();
            const auto& first = t.samples.front();
            if (last.frame >= first.frame)
                throw DataError("track " + std::to_string(t.id) + " starts before its parent " + std::to_string(p) + " ends");
            g.add_edge({last.frame, last.label}, {first.frame, first.label});
        }
    }
    g.classify_edges();
    return g;
}

}  // namespace celltrack
