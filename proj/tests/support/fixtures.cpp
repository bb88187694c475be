#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "absforge/proposer.hpp"

namespace absforge::testing {

std::string fixture_path(std::string_view rel) {
  return (std::filesystem::path(ABSFORGE_FIXTURES_DIR) / std::string(rel)).string();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const pddl::Domain> load_domain(std::string_view rel) {
  auto path = fixture_path(rel);
  return std::make_shared<const pddl::Domain>(pddl::parse_domain(read_text(path), path));
}

pddl::Instance load_instance(const std::shared_ptr<const pddl::Domain>& dom, std::string_view rel) {
  auto path = fixture_path(rel);
  return pddl::parse_instance(read_text(path), dom, path);
}

std::vector<pddl::Instance> load_instances(const std::shared_ptr<const pddl::Domain>& dom,
                                           const std::vector<std::string>& rels) {
  std::vector<pddl::Instance> out;
  for (const auto& r : rels) out.push_back(load_instance(dom, r));
  return out;
}

refinement::Abstraction load_abstraction(std::string_view rel, const pddl::Domain& dom) {
  auto doc = proposer::parse_abstraction_doc(read_text(fixture_path(rel)), &dom);
  auto v = proposer::validate_doc(doc, dom);
  if (auto* a = std::get_if<refinement::Abstraction>(&v)) return std::move(*a);
  const auto& r = std::get<pipeline::DebugReport>(v);
  std::string msg = "invalid fixture document " + std::string(rel);
  for (const auto& s : r.violations) msg += "; " + s;
  throw std::runtime_error(msg);
}

qnp::Problem load_qnp(std::string_view rel) {
  auto path = fixture_path(rel);
  return qnp::parse_qnp(read_text(path), path);
}

std::vector<std::string> qnp_fixtures() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(fixture_path("qnp"))) {
    if (e.path().extension() == ".qnp") out.push_back("qnp/" + e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Inline parse_inline(std::string_view domain, std::string_view problem) {
  auto dom = std::make_shared<const pddl::Domain>(pddl::parse_domain(domain));
  auto inst = pddl::parse_instance(problem, dom);
  return {dom, std::move(inst)};
}

const std::string_view kMiniGripper = R"(
(define (domain gripper)
  (:requirements :strips :typing)
  (:types room ball gripper)
  (:predicates (at-robby ?r - room) (at ?b - ball ?r - room) (free ?g - gripper)
               (carry ?b - ball ?g - gripper) (goal_at ?b - ball ?r - room))
  (:action move
    :parameters (?from ?to - room)
    :precondition (at-robby ?from)
    :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (at ?b ?r) (at-robby ?r) (free ?g))
    :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g))))
  (:action drop
    :parameters (?b - ball ?r - room ?g - gripper)
    :precondition (and (carry ?b ?g) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g)))))
)";

std::string mini_gripper_problem(int rooms, int balls, std::string_view extra_init, std::string_view goal) {
  std::string s = "(define (problem mini) (:domain gripper) (:objects";
  for (int r = 1; r <= rooms; ++r) s += " r" + std::to_string(r);
  s += " - room";
  for (int b = 1; b <= balls; ++b) s += " b" + std::to_string(b);
  if (balls > 0) s += " - ball";
  s += " g1 g2 - gripper)\n (:init (at-robby r1) (free g1) (free g2)";
  if (extra_init.empty()) {
    for (int b = 1; b <= balls; ++b) {
      s += " (at b" + std::to_string(b) + " r1) (goal_at b" + std::to_string(b) + " r" + std::to_string(rooms) + ")";
    }
  } else {
    s += " " + std::string(extra_init);
  }
  s += ")\n (:goal (and";
  if (goal.empty()) {
    for (int b = 1; b <= balls; ++b) s += " (at b" + std::to_string(b) + " r" + std::to_string(rooms) + ")";
  } else {
    s += " " + std::string(goal);
  }
  s += ")))\n";
  return s;
}

}  // namespace absforge::testing
