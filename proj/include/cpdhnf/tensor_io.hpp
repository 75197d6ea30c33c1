#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "cpdhnf/tensor.hpp"

namespace cpdhnf {

using AnyTensor = std::variant<TensorR, TensorC>;

inline constexpr const char* tensor_magic = "cpdhnf-tensor v1";

[[nodiscard]] AnyTensor read_tensor(std::istream& in);
[[nodiscard]] AnyTensor read_tensor_file(const std::string& path);

template <class Scalar>
void write_tensor(std::ostream& out, const DenseTensor<Scalar>& t);
template <class Scalar>
void write_tensor_file(const std::string& path, const DenseTensor<Scalar>& t);

}  // namespace cpdhnf
