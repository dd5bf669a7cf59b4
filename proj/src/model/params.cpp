#include "mno/model/params.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "mno/core/error.hpp"

namespace mno::model {

void ParamLayout::add(const std::string& name, std::vector<std::size_t> shape, bool complex) {
    for (const auto& b : blocks_) require(b.name != name, "duplicate parameter block '" + name + "'");
    ParamBlock b;
    b.name = name;
    b.shape = std::move(shape);
    b.complex = complex;
    b.offset = total_;
    b.count = std::accumulate(b.shape.begin(), b.shape.end(), std::size_t(1), std::multiplies<>()) *
              (complex ? 2 : 1);
    total_ += b.count;
    blocks_.push_back(std::move(b));
}

const ParamBlock& ParamLayout::block(const std::string& name) const {
    for (const auto& b : blocks_)
        if (b.name == name) return b;
    throw ValidationError("no parameter block named '" + name + "'");
}

bool ParamLayout::operator==(const ParamLayout& other) const {
    if (blocks_.size() != other.blocks_.size() || total_ != other.total_) return false;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const auto& a = blocks_[i];
        const auto& b = other.blocks_[i];
        if (a.name != b.name || a.shape != b.shape || a.complex != b.complex) return false;
    }
    return true;
}

std::span<double> ModelParams::block(const std::string& name) { return block(layout.block(name)); }

std::span<const double> ModelParams::block(const std::string& name) const { return block(layout.block(name)); }

std::complex<double>* ModelParams::complex_block(const ParamBlock& b) {
    return reinterpret_cast<std::complex<double>*>(values.data() + b.offset);
}

const std::complex<double>* ModelParams::complex_block(const ParamBlock& b) const {
    return reinterpret_cast<const std::complex<double>*>(values.data() + b.offset);
}

void ModelParams::zero() { std::fill(values.begin(), values.end(), 0.0); }

}  // namespace mno::model
