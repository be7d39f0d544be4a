#include "beliefnet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace beliefnet {

namespace {

std::string axis_list(const std::vector<Axis>& axes) {
    std::string out = "[";
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (i > 0) out += ", ";
        out += axes[i].var + ":" + std::to_string(axes[i].size);
    }
    return out + "]";
}

// Row-major strides; an empty axis list yields an empty stride vector.
std::vector<std::size_t> make_strides(const std::vector<Axis>& axes) {
    std::vector<std::size_t> strides(axes.size());
    std::size_t acc = 1;
    for (std::size_t i = axes.size(); i-- > 0;) {
        strides[i] = acc;
        acc *= axes[i].size;
    }
    return strides;
}

} // namespace

Tensor::Tensor(std::vector<Axis> axes, std::vector<double> data)
    : axes_(std::move(axes)), data_(std::move(data)) {
    std::size_t expected = 1;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (axes_[i].size == 0) {
            throw TensorShapeError("axis '" + axes_[i].var + "' has size 0");
        }
        for (std::size_t j = i + 1; j < axes_.size(); ++j) {
            if (axes_[i].var == axes_[j].var) {
                throw TensorShapeError("duplicate axis '" + axes_[i].var + "' in one tensor");
            }
        }
        expected *= axes_[i].size;
    }
    if (data_.size() != expected) {
        throw TensorShapeError("data length " + std::to_string(data_.size()) +
                               " does not match axes " + axis_list(axes_));
    }
    for (double v : data_) {
        if (!std::isfinite(v)) throw TensorShapeError("tensor element is not finite");
        if (v < 0.0) throw TensorShapeError("tensor element is negative");
    }
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != axes_.size()) {
        throw TensorShapeError("multi-index order " + std::to_string(index.size()) +
                               " does not match tensor order " + std::to_string(axes_.size()));
    }
    std::size_t flat = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (index[i] >= axes_[i].size) {
            throw TensorShapeError("index " + std::to_string(index[i]) + " out of range on axis '" +
                                   axes_[i].var + "'");
        }
        flat = flat * axes_[i].size + index[i];
    }
    return flat;
}

std::vector<std::size_t> Tensor::multi_index(std::size_t flat) const {
    std::vector<std::size_t> index(axes_.size());
    for (std::size_t i = axes_.size(); i-- > 0;) {
        index[i] = flat % axes_[i].size;
        flat /= axes_[i].size;
    }
    return index;
}

std::size_t Tensor::stride(std::size_t pos) const {
    std::size_t acc = 1;
    for (std::size_t i = axes_.size(); i-- > pos + 1;) acc *= axes_[i].size;
    return acc;
}

std::optional<std::size_t> Tensor::axis_position(std::string_view var) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (axes_[i].var == var) return i;
    }
    return std::nullopt;
}

double Tensor::sum() const {
    double acc = 0.0;
    for (double v : data_) acc += v;
    return acc;
}

double Tensor::max_value() const {
    double best = data_[0];
    for (double v : data_) best = std::max(best, v);
    return best;
}

Tensor term_product(const Tensor& a, const Tensor& b) {
    if (a.order() != b.order()) {
        throw TensorShapeError("term product axis sets differ: " + axis_list(a.axes()) + " vs " +
                               axis_list(b.axes()));
    }
    // Position of each a-axis inside b, aligned by var id.
    std::vector<std::size_t> b_pos(a.order());
    bool aligned = true;
    for (std::size_t i = 0; i < a.order(); ++i) {
        auto pos = b.axis_position(a.axis(i).var);
        if (!pos || b.axis(*pos).size != a.axis(i).size) {
            throw TensorShapeError("term product axis sets differ: " + axis_list(a.axes()) +
                                   " vs " + axis_list(b.axes()));
        }
        b_pos[i] = *pos;
        if (*pos != i) aligned = false;
    }

    std::vector<double> out(a.size());
    if (aligned) {
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.flat(i) * b.flat(i);
        return Tensor(a.axes(), std::move(out));
    }

    std::vector<std::size_t> b_stride(a.order());
    for (std::size_t i = 0; i < a.order(); ++i) b_stride[i] = b.stride(b_pos[i]);

    std::vector<std::size_t> idx(a.order(), 0);
    std::size_t b_flat = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a.flat(i) * b.flat(b_flat);
        // Odometer increment over a's axes, rightmost fastest.
        for (std::size_t d = a.order(); d-- > 0;) {
            b_flat += b_stride[d];
            if (++idx[d] < a.axis(d).size) break;
            b_flat -= b_stride[d] * a.axis(d).size;
            idx[d] = 0;
        }
    }
    return Tensor(a.axes(), std::move(out));
}

Tensor outer_product(const Tensor& a, const Tensor& b) {
    for (const Axis& ax : a.axes()) {
        if (b.has_axis(ax.var)) {
            throw TensorShapeError("outer product operands share axis '" + ax.var + "'");
        }
    }
    std::vector<Axis> axes = a.axes();
    axes.insert(axes.end(), b.axes().begin(), b.axes().end());
    std::vector<double> out;
    out.reserve(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out.push_back(a.flat(i) * b.flat(j));
    }
    return Tensor(std::move(axes), std::move(out));
}

Contraction inner_product(const Tensor& a, const Tensor& b, CombineOp op) {
    // Common axes in a's order of appearance.
    std::vector<std::size_t> common_a, common_b;
    for (std::size_t i = 0; i < a.order(); ++i) {
        if (auto pos = b.axis_position(a.axis(i).var)) {
            if (b.axis(*pos).size != a.axis(i).size) {
                throw TensorShapeError("shared axis '" + a.axis(i).var + "' has size " +
                                       std::to_string(a.axis(i).size) + " vs " +
                                       std::to_string(b.axis(*pos).size));
            }
            common_a.push_back(i);
            common_b.push_back(*pos);
        }
    }

    if (common_a.empty()) {
        Contraction out{outer_product(a, b), std::nullopt};
        if (op == CombineOp::Max) {
            out.witnesses = WitnessTable{{}, std::vector<std::vector<std::size_t>>(out.value.size())};
        }
        return out;
    }

    std::vector<std::size_t> free_a, free_b;
    for (std::size_t i = 0; i < a.order(); ++i) {
        if (std::find(common_a.begin(), common_a.end(), i) == common_a.end()) free_a.push_back(i);
    }
    for (std::size_t i = 0; i < b.order(); ++i) {
        if (std::find(common_b.begin(), common_b.end(), i) == common_b.end()) free_b.push_back(i);
    }

    std::vector<Axis> result_axes;
    for (std::size_t i : free_a) result_axes.push_back(a.axis(i));
    for (std::size_t i : free_b) result_axes.push_back(b.axis(i));

    std::size_t result_size = 1;
    for (const Axis& ax : result_axes) result_size *= ax.size;
    std::size_t common_size = 1;
    for (std::size_t i : common_a) common_size *= a.axis(i).size;

    // Flat offsets contributed by every joint common index, in row-major
    // order over the common axes (a's order); lowest joint index first, so
    // the first strict maximum realizes the tie-break.
    std::vector<std::size_t> add_a(common_size, 0), add_b(common_size, 0);
    std::vector<std::vector<std::size_t>> common_idx(common_size);
    {
        std::vector<std::size_t> idx(common_a.size(), 0);
        for (std::size_t k = 0; k < common_size; ++k) {
            std::size_t fa = 0, fb = 0;
            for (std::size_t d = 0; d < common_a.size(); ++d) {
                fa += idx[d] * a.stride(common_a[d]);
                fb += idx[d] * b.stride(common_b[d]);
            }
            add_a[k] = fa;
            add_b[k] = fb;
            common_idx[k] = idx;
            for (std::size_t d = common_a.size(); d-- > 0;) {
                if (++idx[d] < a.axis(common_a[d]).size) break;
                idx[d] = 0;
            }
        }
    }

    std::vector<double> out(result_size);
    WitnessTable table;
    if (op == CombineOp::Max) {
        table.contracted.reserve(common_a.size());
        for (std::size_t i : common_a) table.contracted.push_back(a.axis(i));
        table.best.resize(result_size);
    }

    std::vector<std::size_t> ridx(result_axes.size(), 0);
    for (std::size_t r = 0; r < result_size; ++r) {
        std::size_t base_a = 0, base_b = 0;
        for (std::size_t d = 0; d < free_a.size(); ++d) base_a += ridx[d] * a.stride(free_a[d]);
        for (std::size_t d = 0; d < free_b.size(); ++d) {
            base_b += ridx[free_a.size() + d] * b.stride(free_b[d]);
        }

        if (op == CombineOp::Sum) {
            double acc = 0.0;
            for (std::size_t k = 0; k < common_size; ++k) {
                acc += a.flat(base_a + add_a[k]) * b.flat(base_b + add_b[k]);
            }
            out[r] = acc;
        } else {
            double best = a.flat(base_a + add_a[0]) * b.flat(base_b + add_b[0]);
            std::size_t best_k = 0;
            for (std::size_t k = 1; k < common_size; ++k) {
                double v = a.flat(base_a + add_a[k]) * b.flat(base_b + add_b[k]);
                if (v > best) {
                    best = v;
                    best_k = k;
                }
            }
            out[r] = best;
            table.best[r] = common_idx[best_k];
        }

        for (std::size_t d = result_axes.size(); d-- > 0;) {
            if (++ridx[d] < result_axes[d].size) break;
            ridx[d] = 0;
        }
    }

    Contraction result{Tensor(std::move(result_axes), std::move(out)), std::nullopt};
    if (op == CombineOp::Max) result.witnesses = std::move(table);
    return result;
}

Tensor normalize(const Tensor& a, NormalizeMode mode) {
    double denom = mode == NormalizeMode::SumToOne ? a.sum() : a.max_value();
    if (!(denom > 0.0)) {
        throw ZeroMassError("cannot normalize a tensor with no positive element");
    }
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.flat(i) / denom;
    return Tensor(a.axes(), std::move(out));
}

std::pair<std::vector<std::size_t>, double> argmax(const Tensor& a) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a.flat(i) > a.flat(best)) best = i;
    }
    return {a.multi_index(best), a.flat(best)};
}

Tensor unit_vector(const Axis& axis) {
    return Tensor({axis}, std::vector<double>(axis.size, 1.0));
}

Tensor slice(const Tensor& a, std::string_view var, std::size_t index) {
    auto pos = a.axis_position(var);
    if (!pos) throw TensorShapeError("slice: no axis '" + std::string(var) + "'");
    if (index >= a.axis(*pos).size) {
        throw TensorShapeError("slice index " + std::to_string(index) + " out of range on axis '" +
                               std::string(var) + "'");
    }
    std::vector<Axis> axes;
    for (std::size_t i = 0; i < a.order(); ++i) {
        if (i != *pos) axes.push_back(a.axis(i));
    }
    std::vector<double> out;
    out.reserve(a.size() / a.axis(*pos).size);
    std::vector<std::size_t> idx(a.order(), 0);
    idx[*pos] = index;
    std::size_t count = a.size() / a.axis(*pos).size;
    for (std::size_t r = 0; r < count; ++r) {
        out.push_back(a.at(idx));
        for (std::size_t d = a.order(); d-- > 0;) {
            if (d == *pos) continue;
            if (++idx[d] < a.axis(d).size) break;
            idx[d] = 0;
        }
    }
    return Tensor(std::move(axes), std::move(out));
}

} // namespace beliefnet
