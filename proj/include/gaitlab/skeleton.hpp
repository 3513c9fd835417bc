#ifndef GAITLAB_SKELETON_HPP
#define GAITLAB_SKELETON_HPP

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace gaitlab {

/// Undirected joint graph of the quadruped. Edge (parent, child) is also a
/// bone: the parent joint is the bone head and the child joint its tail.
struct SkeletonTopology {
  std::vector<std::string> joints;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> affected_joints;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int index_of(const std::string& name) const;  // -1 when absent

  /// Binary symmetric edge matrix, no self-loops.
  Eigen::MatrixXd edge_matrix() const;

  /// Parent joint per joint (-1 for the root, which is joint 0).
  std::vector<int> parents() const;

  /// Joint and every joint below it in the tree rooted at joint 0.
  std::vector<int> subtree(int joint) const;
};

/// Explicit joint/edge list; the affected joint list defaults to the first
/// non-root joint when left empty.
struct SkeletonConfig {
  bool use_default = true;
  std::vector<std::string> joints;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::string> affected;
};

/// Validates the configuration, or returns the 19-joint default dog:
/// two spine joints, a head tip, and four legs of four joints each. The
/// default affected joint is the rear-left hip.
SkeletonTopology build_skeleton(const SkeletonConfig& config = {});

/// Throws Topology/Validation errors when the topology breaks its invariants.
void validate(const SkeletonTopology& topology);

}  // namespace gaitlab

#endif  // GAITLAB_SKELETON_HPP
