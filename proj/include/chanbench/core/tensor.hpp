// SPDX-License-Identifier: Apache-2.0
//
// chanbench: wireless channel simulation and ML transfer-evaluation toolkit
// Copyright (C) 2026 The chanbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <new>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanbench {

/// Allocator with a fixed 64-byte alignment. Vectorized kernels peel
/// differently depending on where a buffer starts, so a fixed alignment keeps
/// floating-point results bit-reproducible between runs.
template <typename T>
struct AlignedAllocator
{
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U> &) noexcept
    {
    }

    T *allocate(std::size_t n) { return static_cast<T *>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T *p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <typename U>
    bool operator==(const AlignedAllocator<U> &) const noexcept
    {
        return true;
    }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major tensor with a dynamic shape.
template <typename T>
class Tensor
{
public:
    using value_type = T;

    Tensor() = default;

    explicit Tensor(std::vector<int> shape, T fill = T(0)) : shape_(std::move(shape)), data_(count(shape_), fill) {}

    Tensor(std::vector<int> shape, AlignedVector<T> data) : shape_(std::move(shape)), data_(std::move(data))
    {
        if (data_.size() != count(shape_))
            throw std::invalid_argument("Tensor: data size does not match shape");
    }

    Tensor(std::vector<int> shape, const std::vector<T> &data)
        : shape_(std::move(shape)), data_(data.begin(), data.end())
    {
        if (data_.size() != count(shape_))
            throw std::invalid_argument("Tensor: data size does not match shape");
    }

    static std::size_t count(const std::vector<int> &shape)
    {
        std::size_t n = 1;
        for (int d : shape)
        {
            if (d < 0)
                throw std::invalid_argument("Tensor: negative dimension");
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    const std::vector<int> &shape() const { return shape_; }
    int dim(std::size_t i) const { return shape_.at(i); }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    /// Elements per entry along the leading axis.
    std::size_t row_size() const { return shape_.empty() || shape_[0] == 0 ? 0 : data_.size() / static_cast<std::size_t>(shape_[0]); }

    T *data() { return data_.data(); }
    const T *data() const { return data_.data(); }
    AlignedVector<T> &values() { return data_; }
    const AlignedVector<T> &values() const { return data_; }
    std::vector<T> to_vector() const { return {data_.begin(), data_.end()}; }

    T &operator[](std::size_t i) { return data_[i]; }
    const T &operator[](std::size_t i) const { return data_[i]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * row_size(), row_size()}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * row_size(), row_size()}; }

    Tensor reshaped(std::vector<int> shape) const
    {
        if (count(shape) != data_.size())
            throw std::invalid_argument("Tensor: reshape changes element count");
        return Tensor(std::move(shape), data_);
    }

    void reshape(std::vector<int> shape)
    {
        if (count(shape) != data_.size())
            throw std::invalid_argument("Tensor: reshape changes element count");
        shape_ = std::move(shape);
    }

    /// Rows selected along the leading axis.
    Tensor gather(std::span<const std::size_t> rows) const
    {
        std::vector<int> shape = shape_;
        shape[0] = static_cast<int>(rows.size());
        Tensor out(shape);
        const std::size_t rs = row_size();
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            if (rows[i] >= static_cast<std::size_t>(shape_[0]))
                throw std::out_of_range("Tensor::gather: row index out of range");
            std::copy_n(data_.data() + rows[i] * rs, rs, out.data_.data() + i * rs);
        }
        return out;
    }

    template <typename U>
    Tensor<U> cast() const
    {
        AlignedVector<U> v(data_.begin(), data_.end());
        return Tensor<U>(shape_, std::move(v));
    }

    std::string shape_string() const
    {
        std::string s = "(";
        for (std::size_t i = 0; i < shape_.size(); ++i)
            s += (i ? ", " : "") + std::to_string(shape_[i]);
        return s + ")";
    }

private:
    std::vector<int> shape_;
    AlignedVector<T> data_;
};

} // namespace chanbench
