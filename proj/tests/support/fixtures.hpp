#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "nora/rule_language.hpp"

#ifndef NORA_TEST_WORLDS
#error "NORA_TEST_WORLDS must name the worlds directory"
#endif

namespace fixture {

inline std::string world_path(std::string_view file) { return std::string(NORA_TEST_WORLDS) + "/" + std::string(file); }

// Parsed once per file and shared; Programs are immutable after parsing.
inline const nora::Program& world(std::string_view file) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<nora::Program>, std::less<>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(file);
  if (it == cache.end())
    it = cache.emplace(std::string(file), std::make_unique<nora::Program>(nora::parse_program_file(world_path(file))))
             .first;
  return *it->second;
}

inline const nora::Program& nora_world() { return world("nora.lp"); }

// Six-rule fragment: lola, ram and irfan end up living in calcutta.
inline constexpr std::string_view kLolaStory =
    "school_mates_with(ram,irfan). parent_of(lola,ram). living_in(irfan,calcutta).";

// Two exactly-one ambiguous facts, one of which forces a contradiction.
inline constexpr std::string_view kMaryStory =
    "child_of(john,mary). colleague_of(mary,bob). living_in(john,rome). school_mates_with(john,eve). "
    "1{living_in(bob,paris); living_in(bob,rome)}1. 1{child_of(eve,ann); child_of(eve,paul)}1.";

// Three ambiguous facts, eight refinements, half of them inconsistent.
inline constexpr std::string_view kRyanStory =
    "belongs_to(ryan,underage). school_mates_with(cole,will). living_in_same_place(sheila,lalit). "
    "living_in(lalit,kgp). living_in(phil,kgp). 1{living_in(cole,east_rock); living_in(cole,dwight)}1. "
    "1{child_of(ryan,brutus); child_of(ryan,cole)}1. 1{colleague_of(brutus,phil); colleague_of(brutus,sheila)}1.";

// Queries (rob, daisy) and (rob, u).
inline constexpr std::string_view kRobStory =
    "1{colleague_of(rob,sean); colleague_of(rob,shah)}1. living_in(sean,u). living_in(shah,v). "
    "belongs_to(shah,underage). belongs_to_group(rob,male). sibling_of(rob,daisy).";

inline constexpr std::string_view kSeanStory = "1{brother_of(sean,lee); brother_of(sean,joe)}1. parent_of(sean,daisy).";

// Grandmother stories over grandma_mini.lp: two components and their join.
inline constexpr std::string_view kGrandmaBase = "grandparent_of(sam,joe). sister_of(sam,bill). maternal_grandma_of(ty,joe).";
inline constexpr std::string_view kGrandmaDonor = "grandparent_of(ty1,joe1). wife_of(ty1,bob1). has_property(bob1,no_sons).";
inline constexpr std::string_view kGrandmaJoined =
    "grandparent_of(sam2,joe2). sister_of(sam2,bill2). grandparent_of(ty2,joe2). wife_of(ty2,bob2). "
    "has_property(bob2,no_sons).";

}  // namespace fixture
