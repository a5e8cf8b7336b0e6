#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phnn/error.hpp"
#include "phnn/linalg.hpp"

namespace phnn {

/// A named contiguous range inside a ParameterVector.
struct Slice {
    std::string name;
    std::size_t offset = 0;
    std::size_t length = 0;

    bool operator==(const Slice&) const = default;
};

/// Flat vector of trainable reals plus a layout naming which term owns which range.
///
/// Invariant: slices are ordered, disjoint, and tile [0, size()) exactly.
class ParameterVector {
public:
    ParameterVector() = default;

    ParameterVector(Vec values, std::vector<Slice> layout)
        : values_(std::move(values)), layout_(std::move(layout)) {
        validate_layout();
    }

    /// One slice covering the whole vector.
    static ParameterVector single(std::string name, Vec values) {
        const auto n = static_cast<std::size_t>(values.size());
        return ParameterVector(std::move(values), {Slice{std::move(name), 0, n}});
    }

    /// Concatenate parts; each part collapses to one slice with the given name.
    static ParameterVector concat(const std::vector<std::pair<std::string, Vec>>& parts) {
        std::size_t total = 0;
        for (const auto& [name, v] : parts) total += static_cast<std::size_t>(v.size());
        Vec values(static_cast<Eigen::Index>(total));
        std::vector<Slice> layout;
        std::size_t offset = 0;
        for (const auto& [name, v] : parts) {
            const auto n = static_cast<std::size_t>(v.size());
            values.segment(static_cast<Eigen::Index>(offset), v.size()) = v;
            layout.push_back(Slice{name, offset, n});
            offset += n;
        }
        return ParameterVector(std::move(values), std::move(layout));
    }

    const Vec& values() const noexcept { return values_; }
    const std::vector<Slice>& layout() const noexcept { return layout_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

    /// Replace the values, keeping the layout. Length must not change.
    void assign(const Eigen::Ref<const Vec>& values) {
        detail::require_size(values.size(), values_.size(), "ParameterVector::assign");
        values_ = values;
    }

    ParameterVector with_values(const Eigen::Ref<const Vec>& values) const {
        ParameterVector copy = *this;
        copy.assign(values);
        return copy;
    }

    bool has(std::string_view name) const {
        for (const auto& s : layout_)
            if (s.name == name) return true;
        return false;
    }

    const Slice& slice(std::string_view name) const {
        for (const auto& s : layout_)
            if (s.name == name) return s;
        throw ValidationError("ParameterVector: no slice named '" + std::string(name) + "'");
    }

    auto segment(std::string_view name) const {
        const Slice& s = slice(name);
        return values_.segment(static_cast<Eigen::Index>(s.offset), static_cast<Eigen::Index>(s.length));
    }

    bool operator==(const ParameterVector& other) const {
        return layout_ == other.layout_ && values_.size() == other.values_.size() &&
               values_ == other.values_;
    }

private:
    void validate_layout() const {
        std::size_t expected = 0;
        for (const auto& s : layout_) {
            if (s.offset != expected)
                throw ValidationError("ParameterVector: slice '" + s.name + "' does not start at " +
                                      std::to_string(expected));
            expected += s.length;
        }
        if (expected != size())
            throw ValidationError("ParameterVector: layout covers " + std::to_string(expected) +
                                  " entries but vector has " + std::to_string(size()));
    }

    Vec values_;
    std::vector<Slice> layout_;
};

}  // namespace phnn
