#pragma once

// Building blocks of the estimator network, exposed for layer-level gradient
// tests. Activations are (channels x positions) column-major matrices with
// position index p = row * n_cols + col.

#include <Eigen/Dense>

#include <vector>

namespace owc::nn::detail {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

/// Two-point linear interpolation weights from pilot rows onto output rows.
struct ResizeTable {
    int in_rows = 0;
    int out_rows = 0;
    std::vector<int> lo, hi;
    std::vector<double> w_lo, w_hi;

    static ResizeTable aligned(int out_rows, int first, int spacing, int n_in);
};

/// in: channels x (in_rows * cols)  ->  out: channels x (out_rows * cols).
template <typename T>
void resize_forward(const ResizeTable& r, int cols, const Mat<T>& in, Mat<T>& out);

template <typename T>
void resize_backward(const ResizeTable& r, int cols, const Mat<T>& d_out, Mat<T>& d_in);

/// 3x3 same-padded convolution via im2col. col has rows ordered (kernel tap, channel).
template <typename T>
void im2col(const Mat<T>& in, int rows, int cols, Mat<T>& col);

template <typename T>
void col2im(const Mat<T>& col, int channels, int rows, int cols, Mat<T>& d_in);

/// weight: out_ch x (9 * in_ch) in (tap, channel) order.
template <typename T>
void conv_forward(const Mat<T>& weight, const Eigen::Matrix<T, Eigen::Dynamic, 1>& bias,
                  const Mat<T>& col, Mat<T>& out);

template <typename T>
void relu_forward(Mat<T>& z);

/// d_z *= (z > 0) where z is the post-activation value.
template <typename T>
void relu_backward(const Mat<T>& activated, Mat<T>& d);

/// channels x (rows * cols) -> channels x rows, mean over cols.
template <typename T>
void mean_cols_forward(const Mat<T>& in, int rows, int cols, Mat<T>& out);

template <typename T>
void mean_cols_backward(const Mat<T>& d_out, int rows, int cols, Mat<T>& d_in);

} // namespace owc::nn::detail
