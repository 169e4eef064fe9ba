#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace celltrack {

/// Raised for malformed inputs: bad files, inconsistent grids, invalid parameters.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// Row-major 2D grid. Width and height are always >= 1.
template <typename V>
class Raster2D {
public:
    Raster2D() : Raster2D(1, 1) {}
    Raster2D(int width, int height, V fill = V{}) : width_(width), height_(height) {
        if (width < 1 || height < 1) {
            throw DataError("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                            std::to_string(height));
        }
        values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    int index(int x, int y) const { return y * width_ + x; }
    Point point(int idx) const { return {idx % width_, idx / width_}; }

    V& operator()(int x, int y) { return values_[static_cast<std::size_t>(index(x, y))]; }
    const V& operator()(int x, int y) const { return values_[static_cast<std::size_t>(index(x, y))]; }
    V& operator[](std::size_t i) { return values_[i]; }
    const V& operator[](std::size_t i) const { return values_[i]; }

    std::vector<V>& values() { return values_; }
    const std::vector<V>& values() const { return values_; }

    bool same_shape(const Raster2D<V>& o) const { return width_ == o.width_ && height_ == o.height_; }
    template <typename U>
    bool same_shape(const Raster2D<U>& o) const {
        return width_ == o.width() && height_ == o.height();
    }

    friend bool operator==(const Raster2D&, const Raster2D&) = default;

private:
    int width_;
    int height_;
    std::vector<V> values_;
};

using Label = std::uint32_t;
using RealRaster = Raster2D<double>;
/// Storage type for proxy planes; they hold float32 on disk as well.
using FloatRaster = Raster2D<float>;

template <typename To, typename From>
Raster2D<To> raster_cast(const Raster2D<From>& in) {
    Raster2D<To> out(in.width(), in.height());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<To>(in[i]);
    return out;
}

/// Instance labels for one frame; 0 is background.
struct LabelFrame {
    Raster2D<Label> raster;
    int frame_index = 0;

    LabelFrame() = default;
    LabelFrame(int width, int height, int frame = 0) : raster(width, height, 0), frame_index(frame) {}
    LabelFrame(Raster2D<Label> r, int frame) : raster(std::move(r)), frame_index(frame) {}

    int width() const { return raster.width(); }
    int height() const { return raster.height(); }
    Label max_label() const;

    friend bool operator==(const LabelFrame&, const LabelFrame&) = default;
};

}  // namespace celltrack
