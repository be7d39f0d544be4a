#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "beliefnet/errors.hpp"

namespace beliefnet {

// One named dimension of a tensor. Axes are identified by variable id, not
// by position: elementwise operations align operands by id first.
struct Axis {
    std::string var;
    std::size_t size = 0;

    friend bool operator==(const Axis&, const Axis&) = default;
};

enum class CombineOp { Sum, Max };

enum class NormalizeMode { SumToOne, MaxToOne };

// Dense tensor of nonnegative finite reals with named, ordered axes.
// Storage is row-major: the leftmost axis varies slowest. An empty axis
// list is a scalar (one element). Values are immutable after construction.
class Tensor {
public:
    // Multiplicative identity scalar; keeps fold loops free of empty cases.
    Tensor() : data_{1.0} {}

    Tensor(std::vector<Axis> axes, std::vector<double> data);

    static Tensor scalar(double value) { return Tensor({}, {value}); }

    std::size_t order() const { return axes_.size(); }
    const std::vector<Axis>& axes() const { return axes_; }
    const Axis& axis(std::size_t pos) const { return axes_[pos]; }
    std::size_t size() const { return data_.size(); }
    std::span<const double> data() const { return data_; }
    double flat(std::size_t i) const { return data_[i]; }

    double at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

    std::size_t flat_index(std::span<const std::size_t> index) const;
    std::vector<std::size_t> multi_index(std::size_t flat) const;

    // Distance between consecutive indices along one axis position.
    std::size_t stride(std::size_t pos) const;

    std::optional<std::size_t> axis_position(std::string_view var) const;
    bool has_axis(std::string_view var) const { return axis_position(var).has_value(); }

    double sum() const;
    double max_value() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<Axis> axes_;
    std::vector<double> data_;
};

// Maximizing contracted-index assignments recorded by the max inner
// product: best[r] holds, for result element r, one index per contracted
// axis (in `contracted` order, which follows the left operand).
struct WitnessTable {
    std::vector<Axis> contracted;
    std::vector<std::vector<std::size_t>> best;
};

struct Contraction {
    Tensor value;
    std::optional<WitnessTable> witnesses; // present iff op == Max
};

// Elementwise product over identical axis sets (order may differ; the
// result takes a's axis order).
Tensor term_product(const Tensor& a, const Tensor& b);

// Tensor product over disjoint axis sets; result axes are a's then b's.
Tensor outer_product(const Tensor& a, const Tensor& b);

// Contraction over the axes common to a and b. CombineOp::Sum folds the
// products by summation, CombineOp::Max by maximization; Max also records
// a witness per result element, ties broken by lowest row-major joint
// index over the contracted axes. With no common axes this degenerates to
// the outer product.
Contraction inner_product(const Tensor& a, const Tensor& b, CombineOp op);

// Scale so elements sum to one (SumToOne) or the largest element is one
// (MaxToOne). The argmax set is unchanged. Throws ZeroMassError when the
// tensor has no positive element.
Tensor normalize(const Tensor& a, NormalizeMode mode);

// Lexicographically smallest multi-index attaining the maximum, with the
// maximum value.
std::pair<std::vector<std::size_t>, double> argmax(const Tensor& a);

// Order-1 all-ones tensor on the given axis.
Tensor unit_vector(const Axis& axis);

// Fix one axis at the given index and drop it from the result.
Tensor slice(const Tensor& a, std::string_view var, std::size_t index);

} // namespace beliefnet
