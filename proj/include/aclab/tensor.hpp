#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace aclab {

// Dense n-dimensional array of 64-bit floats in row-major order. The
// universal value type for images, gradients and embeddings.
class Tensor {
  public:
    Tensor() = default;

    // Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<size_t> shape);

    // Takes ownership of the values; validates length and finiteness.
    Tensor(std::vector<size_t> shape, std::vector<double> values);

    static Tensor fromVector(std::vector<double> values);
    static Tensor scalar(double value);

    const std::vector<size_t>& shape() const { return shape_; }
    size_t rank() const { return shape_.size(); }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](size_t i) const { return data_[i]; }
    double& operator[](size_t i) { return data_[i]; }

    bool sameShape(const Tensor& other) const { return shape_ == other.shape_; }
    bool allFinite() const;

    double minValue() const;
    double maxValue() const;
    double l2Norm() const;

    std::string shapeString() const;

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

  private:
    std::vector<size_t> shape_;
    std::vector<double> data_;
};

std::string shapeString(const std::vector<size_t>& shape);
size_t shapeProduct(const std::vector<size_t>& shape);

}  // namespace aclab
