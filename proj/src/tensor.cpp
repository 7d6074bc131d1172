#include "aclab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace aclab {

size_t shapeProduct(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

std::string shapeString(const std::vector<size_t>& shape) {
    std::ostringstream out;
    out << '(';
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ',';
        out << shape[i];
    }
    out << ')';
    return out.str();
}

Tensor::Tensor(std::vector<size_t> shape) : shape_(std::move(shape)) {
    for (size_t d : shape_) {
        if (d == 0) {
            throw std::invalid_argument("tensor: zero dimension in shape " +
                                        aclab::shapeString(shape_));
        }
    }
    data_.assign(shapeProduct(shape_), 0.0);
}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != shapeProduct(shape_)) {
        throw std::invalid_argument(
            "tensor: " + std::to_string(data_.size()) +
            " values do not fill shape " + aclab::shapeString(shape_));
    }
    if (!allFinite()) {
        throw std::invalid_argument("tensor: non-finite value in shape " +
                                    aclab::shapeString(shape_));
    }
}

Tensor Tensor::fromVector(std::vector<double> values) {
    const size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

bool Tensor::allFinite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Tensor::minValue() const {
    return *std::min_element(data_.begin(), data_.end());
}

double Tensor::maxValue() const {
    return *std::max_element(data_.begin(), data_.end());
}

double Tensor::l2Norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

std::string Tensor::shapeString() const { return aclab::shapeString(shape_); }

}  // namespace aclab
