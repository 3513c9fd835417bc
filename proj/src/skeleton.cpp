#include "gaitlab/skeleton.hpp"

#include "gaitlab/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace gaitlab {

namespace {

const std::vector<std::string> kDefaultJoints = {
    "spine_rear",                                                           // 0
    "spine_front",                                                          // 1
    "head_tip",                                                             // 2
    "hip_rear_left",      "knee_rear_left",  "ankle_rear_left",  "paw_rear_left",   // 3-6
    "hip_rear_right",     "knee_rear_right", "ankle_rear_right", "paw_rear_right",  // 7-10
    "shoulder_front_left",  "elbow_front_left",  "wrist_front_left",  "paw_front_left",   // 11-14
    "shoulder_front_right", "elbow_front_right", "wrist_front_right", "paw_front_right",  // 15-18
};

std::vector<std::pair<int, int>> default_edges() {
  std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}};
  auto leg = [&](int attach, int first) {
    edges.emplace_back(attach, first);
    edges.emplace_back(first, first + 1);
    edges.emplace_back(first + 1, first + 2);
    edges.emplace_back(first + 2, first + 3);
  };
  leg(0, 3);
  leg(0, 7);
  leg(1, 11);
  leg(1, 15);
  return edges;
}

}  // namespace

int SkeletonTopology::index_of(const std::string& name) const {
  const auto it = std::find(joints.begin(), joints.end(), name);
  return it == joints.end() ? -1 : static_cast<int>(it - joints.begin());
}

Eigen::MatrixXd SkeletonTopology::edge_matrix() const {
  const int n = joint_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : edges) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  return a;
}

std::vector<int> SkeletonTopology::parents() const {
  const int n = joint_count();
  std::vector<std::vector<int>> adjacent(n);
  for (const auto& [i, j] : edges) {
    adjacent[i].push_back(j);
    adjacent[j].push_back(i);
  }
  std::vector<int> parent(n, -2);
  parent[0] = -1;
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adjacent[v]) {
      if (parent[w] != -2) continue;
      parent[w] = v;
      stack.push_back(w);
    }
  }
  return parent;
}

std::vector<int> SkeletonTopology::subtree(int joint) const {
  const auto parent = parents();
  std::vector<int> out;
  for (int v = 0; v < joint_count(); ++v) {
    for (int w = v; w >= 0; w = parent[w]) {
      if (w == joint) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

void validate(const SkeletonTopology& topology) {
  const int n = topology.joint_count();
  require(n >= 2, ErrorKind::Validation, "skeleton needs at least 2 joints");
  std::set<std::string> names(topology.joints.begin(), topology.joints.end());
  require(static_cast<int>(names.size()) == n, ErrorKind::Validation, "duplicate joint names");

  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : topology.edges) {
    require(i >= 0 && i < n && j >= 0 && j < n, ErrorKind::Topology,
            "edge (" + std::to_string(i) + "," + std::to_string(j) + ") references an unknown joint");
    require(i != j, ErrorKind::Topology, "self-edge on joint " + std::to_string(i));
    const auto key = std::minmax(i, j);
    require(seen.insert(key).second, ErrorKind::Topology,
            "duplicate edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }

  // Union-find: a tree has n-1 edges and joins everything without cycles.
  std::vector<int> root(n);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  int components = n;
  for (const auto& [i, j] : topology.edges) {
    const int a = find(i), b = find(j);
    require(a != b, ErrorKind::Topology, "edge list contains a cycle");
    root[a] = b;
    --components;
  }
  require(components == 1, ErrorKind::Topology, "edge list is disconnected");

  require(!topology.affected_joints.empty(), ErrorKind::Validation, "affected joint list is empty");
  for (int a : topology.affected_joints)
    require(a >= 0 && a < n, ErrorKind::Validation, "affected joint index out of range");
}

SkeletonTopology build_skeleton(const SkeletonConfig& config) {
  SkeletonTopology topology;
  if (config.use_default) {
    topology.joints = kDefaultJoints;
    topology.edges = default_edges();
    topology.affected_joints = {topology.index_of("hip_rear_left")};
  } else {
    topology.joints = config.joints;
    topology.edges = config.edges;
    for (const auto& name : config.affected) {
      const int index = topology.index_of(name);
      require(index >= 0, ErrorKind::Validation, "unknown affected joint '" + name + "'");
      topology.affected_joints.push_back(index);
    }
    if (topology.affected_joints.empty() && topology.joint_count() >= 2) topology.affected_joints = {1};
  }
  validate(topology);
  return topology;
}

}  // namespace gaitlab
