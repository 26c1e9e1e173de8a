#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "isomt/common.hpp"

namespace isomt::nn {

using Mat = Eigen::MatrixXd;

// Named trainable tensor. grad accumulates across a batch; adam_m / adam_v
// are the optimizer moments and are not part of checkpoints.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat adam_m;
  Mat adam_v;

  Param(std::string n, Mat v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(Mat::Zero(value.rows(), value.cols())),
        adam_m(Mat::Zero(value.rows(), value.cols())),
        adam_v(Mat::Zero(value.rows(), value.cols())) {}
};

// Owns parameters in registration order; order fixes initialization draws,
// optimizer iteration and checkpoint layout.
class ParamStore {
 public:
  Param* add(const std::string& name, Mat init);
  Param* find(const std::string& name) const;  // nullptr when absent
  Param* at(const std::string& name) const;    // Error when absent
  const std::vector<std::unique_ptr<Param>>& items() const { return items_; }
  size_t count() const { return items_.size(); }
  void zero_grads();

 private:
  std::vector<std::unique_ptr<Param>> items_;
  std::unordered_map<std::string, Param*> by_name_;
};

// Reverse-mode tape over float64 matrices. Every op appends a node, so the
// creation order is already topological and backward() is one reverse sweep.
// A tape is single-threaded; batches parallelize by building one tape per
// sentence and harvesting parameter gradients afterwards in a fixed order.
class Tape {
 public:
  int constant(Mat value);
  int leaf(Param* p);  // memoized per tape

  const Mat& val(int id) const { return node(id).value; }
  const Mat& grad(int id) const;

  int add(int a, int b);
  int add_rowvec(int a, int row);  // row: 1 x C node broadcast over a's rows
  int scale(int a, double c);
  int cmul(int a, int b);
  int matmul(int a, int b);
  int matmul_nt(int a, int b);  // a * b^T
  int relu(int a);
  // Row-wise softmax; additive_mask (same shape, typically 0 / -1e9) is
  // applied to the logits first.
  int softmax_rows(int a, const Mat* additive_mask = nullptr);
  int layer_norm(int x, int gain, int bias, double eps = 1e-6);
  int gather_rows(int table, const std::vector<int>& ids);
  int slice_cols(int a, int col0, int ncols);
  int concat_cols(const std::vector<int>& parts);
  // Row t of the result is row t - offset of the input (zero padded), so a
  // kernel-3 convolution is three shifted matmuls.
  int shift_rows(int a, int offset);
  // Sum over rows of label-smoothed cross entropy against target ids.
  int ce_label_smooth_sum(int logits, const std::vector<int>& targets, double smoothing);
  // Sum of mask-weighted squared error against a fixed target column.
  int mse_sum(int pred, const Mat& target, const Mat& mask);

  void backward(int loss);  // loss must be 1x1

  // p->grad += scale * accumulated leaf gradient, in leaf registration order.
  void add_param_grads_to(double scale = 1.0);

 private:
  struct Node {
    Mat value;
    Mat grad;  // empty until something flows into it
    bool needs = false;
    std::function<void()> back;
    Param* param = nullptr;
  };

  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  int push(Mat value, bool needs, std::function<void()> back = nullptr);
  bool needs(int id) const { return node(id).needs; }
  void accum(int id, const Mat& g);

  std::vector<Node> nodes_;
  std::vector<int> leaf_ids_;
  std::unordered_map<Param*, int> leaf_index_;
};

}  // namespace isomt::nn
