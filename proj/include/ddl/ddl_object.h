/* Copyright 2026 The ddlring Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DDL_DDL_OBJECT_H_
#define DDL_DDL_OBJECT_H_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ddl {

enum class DType : std::uint32_t { f32 = 0, f64 = 1, i64 = 2 };

std::size_t element_size(DType dtype);
std::string_view to_string(DType dtype);
// Accepts "f32", "f64", "i64"; throws InvalidArgument otherwise.
DType parse_dtype(std::string_view text);

template <typename T>
struct dtype_of;
template <>
struct dtype_of<float> {
  static constexpr DType value = DType::f32;
};
template <>
struct dtype_of<double> {
  static constexpr DType value = DType::f64;
};
template <>
struct dtype_of<std::int64_t> {
  static constexpr DType value = DType::i64;
};

// Accelerator memory is emulated: buffers always live in process memory and
// the kind is a tag carried for placement decisions.
enum class MemoryKind { emulated_host, emulated_device };

struct Placement {
  std::string host;
  int device = 0;
  MemoryKind memory = MemoryKind::emulated_device;

  friend bool operator==(const Placement&, const Placement&) = default;
};

// A contiguous numeric buffer together with where it lives. Length, element
// type and placement are fixed at construction.
class DdlObject {
 public:
  DdlObject(DType dtype, std::size_t count, Placement placement = {});

  template <typename T>
  static DdlObject from(std::span<const T> values, Placement placement = {}) {
    DdlObject obj(dtype_of<T>::value, values.size(), std::move(placement));
    auto out = obj.view<T>();
    std::copy(values.begin(), values.end(), out.begin());
    return obj;
  }

  DType dtype() const { return dtype_; }
  std::size_t size() const { return count_; }
  std::size_t size_bytes() const { return data_.size(); }
  const Placement& placement() const { return placement_; }

  std::span<std::byte> bytes() { return data_; }
  std::span<const std::byte> bytes() const { return data_; }

  // Throws InvalidArgument when T does not match the element type.
  template <typename T>
  std::span<T> view() {
    check_type(dtype_of<T>::value);
    return {reinterpret_cast<T*>(data_.data()), count_};
  }
  template <typename T>
  std::span<const T> view() const {
    check_type(dtype_of<T>::value);
    return {reinterpret_cast<const T*>(data_.data()), count_};
  }

 private:
  void check_type(DType requested) const;

  DType dtype_;
  std::size_t count_;
  Placement placement_;
  std::vector<std::byte> data_;
};

// dst takes a copy of src's data; metadata of dst is untouched.
void assign(DdlObject& dst, const DdlObject& src);

// FNV-1a over the raw bytes.
std::uint64_t digest(std::span<const std::byte> bytes);

}  // namespace ddl

#endif  // DDL_DDL_OBJECT_H_
