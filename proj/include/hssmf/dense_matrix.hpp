#ifndef HSSMF_DENSE_MATRIX_HPP
#define HSSMF_DENSE_MATRIX_HPP

#include <algorithm>
#include <cassert>
#include <cstring>
#include <iostream>
#include <vector>

#include "counters.hpp"
#include "scalar.hpp"

namespace hssmf {

  // column-major dense matrix. DenseMatrix owns its storage,
  // DenseMatrixWrapper views a block of someone else's.
  template<typename scalar_t> class DenseMatrix {
  protected:
    scalar_t* data_ = nullptr;
    std::size_t rows_ = 0, cols_ = 0, ld_ = 1;

    void allocate(std::size_t r, std::size_t c) {
      rows_ = r; cols_ = c; ld_ = std::max<std::size_t>(r, 1);
      if (r && c) {
        data_ = new scalar_t[r * c]();
        counters::add_bytes(static_cast<std::int64_t>(r * c * sizeof(scalar_t)));
      } else data_ = nullptr;
    }
    void deallocate() {
      if (data_) {
        counters::sub_bytes(static_cast<std::int64_t>(rows_ * cols_ * sizeof(scalar_t)));
        delete[] data_;
        data_ = nullptr;
      }
    }

  public:
    using value_type = scalar_t;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) { allocate(r, c); }
    DenseMatrix(std::size_t r, std::size_t c, const scalar_t* p, std::size_t ldp) {
      allocate(r, c);
      for (std::size_t j = 0; j < c; j++)
        std::copy(p + j * ldp, p + j * ldp + r, data_ + j * ld_);
    }
    DenseMatrix(const DenseMatrix& m) {
      allocate(m.rows_, m.cols_);
      for (std::size_t j = 0; j < cols_; j++)
        std::copy(m.ptr(0, j), m.ptr(0, j) + rows_, data_ + j * ld_);
    }
    DenseMatrix(DenseMatrix&& m) noexcept {
      data_ = m.data_; rows_ = m.rows_; cols_ = m.cols_; ld_ = m.ld_;
      m.data_ = nullptr; m.rows_ = m.cols_ = 0; m.ld_ = 1;
    }
    virtual ~DenseMatrix() { deallocate(); }

    DenseMatrix& operator=(const DenseMatrix& m) {
      if (this == &m) return *this;
      if (rows_ != m.rows_ || cols_ != m.cols_) { deallocate(); allocate(m.rows_, m.cols_); }
      for (std::size_t j = 0; j < cols_; j++)
        std::copy(m.ptr(0, j), m.ptr(0, j) + rows_, ptr(0, j));
      return *this;
    }
    DenseMatrix& operator=(DenseMatrix&& m) noexcept {
      if (this == &m) return *this;
      deallocate();
      data_ = m.data_; rows_ = m.rows_; cols_ = m.cols_; ld_ = m.ld_;
      m.data_ = nullptr; m.rows_ = m.cols_ = 0; m.ld_ = 1;
      return *this;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t ld() const { return ld_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    scalar_t& operator()(std::size_t i, std::size_t j) {
      assert(i < rows_ && j < cols_);
      return data_[i + j * ld_];
    }
    const scalar_t& operator()(std::size_t i, std::size_t j) const {
      assert(i < rows_ && j < cols_);
      return data_[i + j * ld_];
    }
    scalar_t* ptr(std::size_t i, std::size_t j) { return data_ + i + j * ld_; }
    const scalar_t* ptr(std::size_t i, std::size_t j) const { return data_ + i + j * ld_; }
    scalar_t* data() { return data_; }
    const scalar_t* data() const { return data_; }

    void zero() {
      for (std::size_t j = 0; j < cols_; j++)
        std::fill(ptr(0, j), ptr(0, j) + rows_, scalar_t(0));
    }
    void fill(scalar_t v) {
      for (std::size_t j = 0; j < cols_; j++)
        std::fill(ptr(0, j), ptr(0, j) + rows_, v);
    }
    void eye() {
      zero();
      for (std::size_t i = 0; i < std::min(rows_, cols_); i++) operator()(i, i) = scalar_t(1);
    }
    static DenseMatrix identity(std::size_t n) {
      DenseMatrix I(n, n); I.eye(); return I;
    }

    void scale(scalar_t a) {
      for (std::size_t j = 0; j < cols_; j++)
        for (std::size_t i = 0; i < rows_; i++) operator()(i, j) *= a;
    }
    // this += a * m
    void add_scaled(scalar_t a, const DenseMatrix& m) {
      assert(rows_ == m.rows() && cols_ == m.cols());
      for (std::size_t j = 0; j < cols_; j++)
        for (std::size_t i = 0; i < rows_; i++) operator()(i, j) += a * m(i, j);
    }

    real_t<scalar_t> norm_fro() const {
      real_t<scalar_t> s(0);
      for (std::size_t j = 0; j < cols_; j++)
        for (std::size_t i = 0; i < rows_; i++) s += abs2_val(operator()(i, j));
      return std::sqrt(s);
    }
    real_t<scalar_t> max_abs() const {
      real_t<scalar_t> s(0);
      for (std::size_t j = 0; j < cols_; j++)
        for (std::size_t i = 0; i < rows_; i++) s = std::max(s, abs_val(operator()(i, j)));
      return s;
    }

    DenseMatrix transpose(Trans t = Trans::T) const {
      DenseMatrix r(cols_, rows_);
      for (std::size_t j = 0; j < cols_; j++)
        for (std::size_t i = 0; i < rows_; i++)
          r(j, i) = t == Trans::C ? conj_val(operator()(i, j)) : operator()(i, j);
      return r;
    }

    DenseMatrix sub(std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) const {
      assert(i1 <= rows_ && j1 <= cols_ && i0 <= i1 && j0 <= j1);
      DenseMatrix r(i1 - i0, j1 - j0);
      for (std::size_t j = 0; j < r.cols(); j++)
        std::copy(ptr(i0, j0 + j), ptr(i0, j0 + j) + r.rows(), r.ptr(0, j));
      return r;
    }
    DenseMatrix rows_of(const std::vector<int>& idx) const {
      DenseMatrix r(idx.size(), cols_);
      for (std::size_t j = 0; j < cols_; j++)
        for (std::size_t i = 0; i < idx.size(); i++)
          r(i, j) = operator()(static_cast<std::size_t>(idx[i]), j);
      return r;
    }

    void copy_into(std::size_t i, std::size_t j, const DenseMatrix& m) {
      assert(i + m.rows() <= rows_ && j + m.cols() <= cols_);
      for (std::size_t jj = 0; jj < m.cols(); jj++)
        std::copy(m.ptr(0, jj), m.ptr(0, jj) + m.rows(), ptr(i, j + jj));
    }

    // vertical concatenation
    static DenseMatrix vstack(const DenseMatrix& a, const DenseMatrix& b) {
      assert(a.cols() == b.cols() || a.empty() || b.empty());
      std::size_t c = a.cols() ? a.cols() : b.cols();
      DenseMatrix r(a.rows() + b.rows(), c);
      r.copy_into(0, 0, a);
      r.copy_into(a.rows(), 0, b);
      return r;
    }

    // row interchanges, LAPACK xLASWP style: ipiv[i] is the row swapped with
    // row i, absolute 0-based; forward applies i = 0..k-1, backward reverses.
    void laswp(const std::vector<int>& ipiv, bool fwd) {
      if (fwd) {
        for (std::size_t i = 0; i < ipiv.size(); i++) {
          auto p = static_cast<std::size_t>(ipiv[i]);
          if (p != i)
            for (std::size_t j = 0; j < cols_; j++)
              std::swap(operator()(i, j), operator()(p, j));
        }
      } else {
        for (std::size_t i = ipiv.size(); i-- > 0;) {
          auto p = static_cast<std::size_t>(ipiv[i]);
          if (p != i)
            for (std::size_t j = 0; j < cols_; j++)
              std::swap(operator()(i, j), operator()(p, j));
        }
      }
    }

    void print(const char* name = "") const {
      std::cout << name << " (" << rows_ << "x" << cols_ << ")\n";
      for (std::size_t i = 0; i < rows_; i++) {
        for (std::size_t j = 0; j < cols_; j++) std::cout << operator()(i, j) << " ";
        std::cout << "\n";
      }
    }
  };

  template<typename scalar_t>
  class DenseMatrixWrapper : public DenseMatrix<scalar_t> {
  public:
    DenseMatrixWrapper() = default;
    DenseMatrixWrapper(std::size_t r, std::size_t c, scalar_t* p, std::size_t ldp) {
      this->data_ = p; this->rows_ = r; this->cols_ = c;
      this->ld_ = std::max<std::size_t>(ldp, 1);
    }
    DenseMatrixWrapper(std::size_t r, std::size_t c,
                       DenseMatrix<scalar_t>& m, std::size_t i, std::size_t j)
      : DenseMatrixWrapper(r, c, r && c ? m.ptr(i, j) : nullptr, m.ld()) {
      assert(i + r <= m.rows() && j + c <= m.cols());
    }
    DenseMatrixWrapper(const DenseMatrixWrapper& w) { *this = w; }
    DenseMatrixWrapper& operator=(const DenseMatrixWrapper& w) {
      this->data_ = w.data_; this->rows_ = w.rows_;
      this->cols_ = w.cols_; this->ld_ = w.ld_;
      return *this;
    }
    virtual ~DenseMatrixWrapper() { this->data_ = nullptr; }
  };

  // const view helper: kernels take const DenseMatrix&, so wrapping a const
  // block for reading is common enough to deserve a shorthand
  template<typename scalar_t>
  DenseMatrixWrapper<scalar_t>
  const_view(const DenseMatrix<scalar_t>& m,
             std::size_t r, std::size_t c, std::size_t i, std::size_t j) {
    return DenseMatrixWrapper<scalar_t>(
        r, c, r && c ? const_cast<scalar_t*>(m.ptr(i, j)) : nullptr, m.ld());
  }

} // namespace hssmf

#endif
