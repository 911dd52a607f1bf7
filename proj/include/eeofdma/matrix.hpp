/*
 * Copyright 2026 The eeofdma Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * \file eeofdma/matrix.hpp
 *
 * \brief Dense row-major containers for per-(BS, subcarrier) quantities and
 *  the (BS, user, subcarrier) gain tensor.
 */

#ifndef EEOFDMA_MATRIX_HPP
#define EEOFDMA_MATRIX_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace eeofdma {

template <typename T>
class Matrix
{
public:
	Matrix() = default;

	Matrix(std::size_t rows, std::size_t cols, T value = T{})
	: rows_(rows), cols_(cols), data_(rows*cols, value)
	{
	}

	std::size_t rows() const noexcept { return rows_; }
	std::size_t cols() const noexcept { return cols_; }
	std::size_t size() const noexcept { return data_.size(); }
	bool empty() const noexcept { return data_.empty(); }

	T& operator()(std::size_t r, std::size_t c) { return data_[r*cols_+c]; }
	T const& operator()(std::size_t r, std::size_t c) const { return data_[r*cols_+c]; }

	T& at(std::size_t r, std::size_t c)
	{
		check(r, c);
		return data_[r*cols_+c];
	}

	T const& at(std::size_t r, std::size_t c) const
	{
		check(r, c);
		return data_[r*cols_+c];
	}

	std::span<T> row(std::size_t r) { return {data_.data()+r*cols_, cols_}; }
	std::span<T const> row(std::size_t r) const { return {data_.data()+r*cols_, cols_}; }

	std::span<T> flat() { return data_; }
	std::span<T const> flat() const { return data_; }

	bool same_shape(Matrix const& other) const noexcept
	{
		return rows_ == other.rows_ && cols_ == other.cols_;
	}

	void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

	friend bool operator==(Matrix const&, Matrix const&) = default;

private:
	void check(std::size_t r, std::size_t c) const
	{
		if (r >= rows_ || c >= cols_)
		{
			throw std::out_of_range("matrix index out of range");
		}
	}

	std::size_t rows_ = 0;
	std::size_t cols_ = 0;
	std::vector<T> data_;
};

/// G[q][s][n]: transmitter q, user s, subcarrier n.
class GainTensor
{
public:
	GainTensor() = default;

	GainTensor(std::size_t n_tx, std::size_t n_users, std::size_t n_sub, double value = 0.0)
	: n_tx_(n_tx), n_users_(n_users), n_sub_(n_sub), data_(n_tx*n_users*n_sub, value)
	{
	}

	std::size_t n_tx() const noexcept { return n_tx_; }
	std::size_t n_users() const noexcept { return n_users_; }
	std::size_t n_sub() const noexcept { return n_sub_; }

	double& operator()(std::size_t q, std::size_t s, std::size_t n)
	{
		return data_[(q*n_users_+s)*n_sub_+n];
	}

	double operator()(std::size_t q, std::size_t s, std::size_t n) const
	{
		return data_[(q*n_users_+s)*n_sub_+n];
	}

	std::span<double const> flat() const { return data_; }
	std::span<double> flat() { return data_; }

	friend bool operator==(GainTensor const&, GainTensor const&) = default;

private:
	std::size_t n_tx_ = 0;
	std::size_t n_users_ = 0;
	std::size_t n_sub_ = 0;
	std::vector<double> data_;
};

using PowerMatrix = Matrix<double>;
using Schedule = Matrix<std::size_t>;

} // namespace eeofdma

#endif // EEOFDMA_MATRIX_HPP
