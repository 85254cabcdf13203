#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "dopewolfe/errors.hpp"

namespace dopewolfe {

/// Item feature vectors, one row per item, partitioned into one or more
/// lists. Global row index = list_offset(list) + local item index. Pairwise
/// structure (subsets, feature differences) never crosses list boundaries.
class ItemFeatureMatrix {
 public:
  ItemFeatureMatrix(Eigen::MatrixXd rows, std::vector<int> list_sizes,
                    std::vector<std::string> item_ids = {})
      : rows_(std::move(rows)), list_sizes_(std::move(list_sizes)), item_ids_(std::move(item_ids)) {
    if (rows_.cols() < 1) throw validation_error("feature matrix: dimension must be >= 1");
    if (rows_.rows() < 2) throw validation_error("feature matrix: at least 2 items required");
    if (!rows_.allFinite()) throw validation_error("feature matrix: entries must be finite");
    if (list_sizes_.empty()) list_sizes_ = {static_cast<int>(rows_.rows())};
    long total = 0;
    offsets_.push_back(0);
    for (int n : list_sizes_) {
      if (n < 1) throw validation_error("feature matrix: empty list");
      total += n;
      offsets_.push_back(static_cast<int>(total));
    }
    if (total != rows_.rows())
      throw validation_error("feature matrix: list sizes sum to " + std::to_string(total) +
                             ", expected " + std::to_string(rows_.rows()));
    if (item_ids_.empty()) {
      item_ids_.reserve(rows_.rows());
      for (long i = 0; i < rows_.rows(); ++i) item_ids_.push_back(std::to_string(i));
    } else if (static_cast<long>(item_ids_.size()) != rows_.rows()) {
      throw validation_error("feature matrix: item id count does not match row count");
    }
  }

  static ItemFeatureMatrix single_list(Eigen::MatrixXd rows) {
    return ItemFeatureMatrix(std::move(rows), {});
  }

  int dim() const { return static_cast<int>(rows_.cols()); }
  int total_items() const { return static_cast<int>(rows_.rows()); }
  int list_count() const { return static_cast<int>(list_sizes_.size()); }
  int list_size(int list) const { return list_sizes_[list]; }
  const std::vector<int>& list_sizes() const { return list_sizes_; }
  int list_offset(int list) const { return offsets_[list]; }
  int min_list_size() const { return *std::min_element(list_sizes_.begin(), list_sizes_.end()); }

  int global_index(int list, int local) const { return offsets_[list] + local; }
  int list_of(int global) const {
    int list = 0;
    while (offsets_[list + 1] <= global) ++list;
    return list;
  }

  const Eigen::MatrixXd& rows() const { return rows_; }
  Eigen::MatrixXd::ConstRowXpr row(int global) const { return rows_.row(global); }
  const std::string& item_id(int global) const { return item_ids_[global]; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

  /// Scales every row by 1 / (max row norm), so all rows land in the unit
  /// ball with the largest exactly on its boundary. No-op on all-zero input.
  void normalize_to_unit_ball() {
    const double max_norm = rows_.rowwise().norm().maxCoeff();
    if (max_norm > 0.0) rows_ /= max_norm;
    normalized_ = true;
  }
  bool normalized() const { return normalized_; }

 private:
  Eigen::MatrixXd rows_;
  std::vector<int> list_sizes_;
  std::vector<int> offsets_;
  std::vector<std::string> item_ids_;
  bool normalized_ = false;
};

}  // namespace dopewolfe
