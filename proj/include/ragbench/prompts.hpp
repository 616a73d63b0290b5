#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>

#include "ragbench/genctl.hpp"
#include "ragbench/synth.hpp"

namespace ragbench {

enum class TestType { robustness, multihop, generation };
const char* test_type_name(TestType t);
// Accepts full names and the short CLI aliases rob / multi / gen.
TestType test_type_from_name(const std::string& name);
Strategy strategy_for(TestType t);

enum class ObjectiveSubtype { math = 0, fill_blank = 1, true_false = 2, multiple_choice = 3 };
const char* subtype_name(ObjectiveSubtype s);

inline constexpr std::array<const char*, 5> kArchetypeNames = {
    "definition_specification", "process_explanation", "causal_reasoning",
    "comparative_analysis", "problem_identification"};

// Everything decided before rendering a generation prompt.
struct PromptPlan {
    TestType test_type = TestType::robustness;
    bool objective = true;
    ObjectiveSubtype subtype = ObjectiveSubtype::math;  // when objective
    int archetype = 0;                                  // 0..4, when subjective
    bool diversity_focus = false;
    int sim_failures = 0;  // uniqueness-rejection streak at render time
    std::string template_id;
};

// Question-format balancing: keep the objective share near one half, rotate
// objective subtypes toward fixed quotas, rotate subjective archetypes by the
// running question count. Counters advance only on accepted questions.
PromptPlan plan_prompt(TestType t, const GenerationState& state);

// Quota shares for the four objective subtypes, in enum order.
inline constexpr std::array<double, 4> kSubtypeQuotas = {0.30, 0.25, 0.25, 0.20};

// "objective:math", "subjective:causal_reasoning", ...
std::string format_label(const PromptPlan& plan);

// The prompt is assembled from named text components so the wording can be
// reviewed or replaced without recompiling.
class PromptLibrary {
public:
    static PromptLibrary builtin();
    // Loads every *.txt in dir; key = file stem. Missing components throw.
    static PromptLibrary load(const std::filesystem::path& dir);

    const std::string& component(const std::string& key) const;
    const std::map<std::string, std::string>& components() const { return components_; }
    bool operator==(const PromptLibrary&) const = default;

private:
    std::map<std::string, std::string> components_;
};

std::string render_prompt(const PromptLibrary& lib, const PromptPlan& plan,
                          const std::string& context_text);

}  // namespace ragbench
