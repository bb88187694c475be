#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "absforge/pddl.hpp"
#include "absforge/qnp.hpp"
#include "absforge/refinement.hpp"

namespace absforge::testing {

/// Absolute path of a file under tests/fixtures.
std::string fixture_path(std::string_view rel);
std::string read_text(const std::string& path);

std::shared_ptr<const pddl::Domain> load_domain(std::string_view rel);
pddl::Instance load_instance(const std::shared_ptr<const pddl::Domain>& dom, std::string_view rel);
std::vector<pddl::Instance> load_instances(const std::shared_ptr<const pddl::Domain>& dom,
                                           const std::vector<std::string>& rels);
/// Parses and validates a committed document; throws if it is not valid.
refinement::Abstraction load_abstraction(std::string_view rel, const pddl::Domain& dom);
qnp::Problem load_qnp(std::string_view rel);

/// Every .qnp file in tests/fixtures/qnp, sorted.
std::vector<std::string> qnp_fixtures();

/// Domain and instances parsed from inline PDDL text.
struct Inline {
  std::shared_ptr<const pddl::Domain> domain;
  pddl::Instance instance;
};
Inline parse_inline(std::string_view domain, std::string_view problem);

/// A minimal Gripper-style domain used by unit tests.
extern const std::string_view kMiniGripper;
/// Rooms r1..rN, robot in r1. By default every ball starts in r1 and must
/// reach the last room; `extra_init` and `goal` replace those parts.
std::string mini_gripper_problem(int rooms, int balls, std::string_view extra_init = {},
                                 std::string_view goal = {});

}  // namespace absforge::testing
