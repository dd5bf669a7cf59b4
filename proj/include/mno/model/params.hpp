#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace mno::model {

/// One named tensor. Complex blocks store interleaved (re, im) pairs, so `count`
/// real values = 2 * product(shape).
struct ParamBlock {
    std::string name;
    std::vector<std::size_t> shape;
    bool complex = false;
    std::size_t offset = 0;
    std::size_t count = 0;
};

/// Ordered list of blocks; the order is the serialization order.
class ParamLayout {
public:
    void add(const std::string& name, std::vector<std::size_t> shape, bool complex = false);
    const std::vector<ParamBlock>& blocks() const { return blocks_; }
    const ParamBlock& block(const std::string& name) const;
    std::size_t total() const { return total_; }
    bool operator==(const ParamLayout& other) const;

private:
    std::vector<ParamBlock> blocks_;
    std::size_t total_ = 0;
};

/// Flat parameter (or gradient) storage congruent with a layout.
struct ModelParams {
    ParamLayout layout;
    std::vector<double> values;

    ModelParams() = default;
    explicit ModelParams(ParamLayout l) : layout(std::move(l)), values(layout.total(), 0.0) {}

    std::span<double> block(const std::string& name);
    std::span<const double> block(const std::string& name) const;
    std::span<double> block(const ParamBlock& b) { return {values.data() + b.offset, b.count}; }
    std::span<const double> block(const ParamBlock& b) const { return {values.data() + b.offset, b.count}; }
    std::complex<double>* complex_block(const ParamBlock& b);
    const std::complex<double>* complex_block(const ParamBlock& b) const;

    void zero();
};

using GradientBuffer = ModelParams;

}  // namespace mno::model
