#include "ragbench/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ragbench/errors.hpp"

namespace ragbench {

const char* test_type_name(TestType t) {
    switch (t) {
        case TestType::robustness: return "robustness";
        case TestType::multihop: return "multihop";
        case TestType::generation: return "generation";
    }
    return "robustness";
}

TestType test_type_from_name(const std::string& name) {
    if (name == "robustness" || name == "rob") return TestType::robustness;
    if (name == "multihop" || name == "multi") return TestType::multihop;
    if (name == "generation" || name == "gen") return TestType::generation;
    throw ConfigError("unknown test type: " + name);
}

Strategy strategy_for(TestType t) {
    switch (t) {
        case TestType::robustness: return Strategy::needle;
        case TestType::multihop: return Strategy::cross_doc_multihop;
        case TestType::generation: return Strategy::intra_multi_topic;
    }
    return Strategy::needle;
}

const char* subtype_name(ObjectiveSubtype s) {
    switch (s) {
        case ObjectiveSubtype::math: return "math";
        case ObjectiveSubtype::fill_blank: return "fill_blank";
        case ObjectiveSubtype::true_false: return "true_false";
        case ObjectiveSubtype::multiple_choice: return "multiple_choice";
    }
    return "math";
}

PromptPlan plan_prompt(TestType t, const GenerationState& state) {
    PromptPlan plan;
    plan.test_type = t;

    int n_obj = state.objective_count;
    int n_subj = state.subjective_count;
    int total = n_obj + n_subj;
    double r_obj = total == 0 ? 0.0 : static_cast<double>(n_obj) / total;
    plan.objective = r_obj < 0.5;

    if (plan.objective) {
        // Largest remaining quota deficit wins; ties keep enum order.
        int planned = 0;
        for (int c : state.objective_subtype_counts) planned += c;
        int best = 0;
        double best_deficit = -1e9;
        for (int i = 0; i < 4; ++i) {
            double deficit =
                kSubtypeQuotas[static_cast<std::size_t>(i)] * (planned + 1) -
                state.objective_subtype_counts[static_cast<std::size_t>(i)];
            if (deficit > best_deficit) {
                best_deficit = deficit;
                best = i;
            }
        }
        plan.subtype = static_cast<ObjectiveSubtype>(best);
    }
    plan.archetype = total % 5;

    plan.sim_failures = state.consecutive_sim_failures;
    plan.diversity_focus = state.consecutive_sim_failures > 2;

    plan.template_id = std::string(test_type_name(t)) + "/" + format_label(plan);
    return plan;
}

std::string format_label(const PromptPlan& plan) {
    if (plan.objective) return std::string("objective:") + subtype_name(plan.subtype);
    return std::string("subjective:") +
           kArchetypeNames[static_cast<std::size_t>(plan.archetype % 5)];
}

namespace {

const std::map<std::string, std::string>& builtin_components() {
    static const std::map<std::string, std::string> kComponents = {
        {"role",
         "You are a benchmark scientist designing question-answer pairs that probe "
         "retrieval-augmented systems. Every question must be answerable strictly from "
         "the supplied context, and every ground truth must be verifiable against that "
         "context alone."},
        {"type_robustness",
         "TASK: Find a rare or specific fact in the context that is easily overlooked, "
         "and write one question about it. Construct an unambiguous ground truth."},
        {"type_multihop",
         "TASK: Identify a logical chain that requires at least two different sections "
         "of the context, and write one question that forces cross-section synthesis. "
         "The answer must not be derivable from any single section."},
        {"type_generation",
         "TASK: Assume the context is perfect and complete. Write one question that "
         "requires deep reasoning over it - analysis, comparison, or causation - not "
         "mere lookup."},
        {"subtype_math",
         "QUESTION STYLE: Math. Extract ALL required parameters from the context, use "
         "only formulas the context supports, and make the ground truth show the "
         "step-by-step calculation with units."},
        {"subtype_fill_blank",
         "QUESTION STYLE: Fill-in-blank. Write a statement with a blank marked ____ "
         "and extract the EXACT value, with its conditions and units exactly as "
         "stated in the context."},
        {"subtype_true_false",
         "QUESTION STYLE: True/False. State a claim about a specific mechanism that "
         "requires multi-step understanding to verify; across the benchmark produce "
         "both true and false statements."},
        {"subtype_multiple_choice",
         "QUESTION STYLE: Multiple choice. Put all options on one line as (A) (B) (C) "
         "(D); only the context may provide the distinguishing details between them."},
        {"archetype_definition_specification",
         "RECOMMENDED STYLE: Ask for a specific definition or specification value."},
        {"archetype_process_explanation",
         "RECOMMENDED STYLE: Ask about a process sequence or chain of events."},
        {"archetype_causal_reasoning",
         "RECOMMENDED STYLE: Ask for the reason or purpose behind a specification."},
        {"archetype_comparative_analysis",
         "RECOMMENDED STYLE: Compare and contrast related concepts from the context."},
        {"archetype_problem_identification",
         "RECOMMENDED STYLE: Ask about potential problems, defects, or limitations."},
        {"diversity",
         "DIVERSITY FOCUS: The previous {s} attempts were rejected as too similar to "
         "existing questions; try a noticeably different approach.\n"
         "RECOMMENDED STYLE: Focus on '{style}'."},
        {"context_wrapper",
         "--- CONTEXT START ---\n{context}\n--- CONTEXT END ---"},
        {"format",
         "REQUIRED FORMAT: Respond with exactly one JSON object and nothing else: "
         "{\"question\": \"...\", \"ground_truth\": \"...\"}. The question must end "
         "with a question mark unless it is a fill-in-blank containing ____. Quote "
         "every value in the ground truth exactly as the context states it."},
    };
    return kComponents;
}

std::string replace_all(std::string s, const std::string& needle,
                        const std::string& value) {
    std::size_t pos = 0;
    while ((pos = s.find(needle, pos)) != std::string::npos) {
        s.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return s;
}

}  // namespace

PromptLibrary PromptLibrary::builtin() {
    PromptLibrary lib;
    lib.components_ = builtin_components();
    return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("prompt template directory not found: " + dir.string());
    PromptLibrary lib;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
            text.pop_back();
        lib.components_[entry.path().stem().string()] = text;
    }
    for (const auto& [key, value] : builtin_components())
        if (!lib.components_.count(key))
            throw ConfigError("prompt template directory " + dir.string() +
                              " is missing component: " + key);
    return lib;
}

const std::string& PromptLibrary::component(const std::string& key) const {
    auto it = components_.find(key);
    if (it == components_.end()) throw LookupError("unknown prompt component: " + key);
    return it->second;
}

std::string render_prompt(const PromptLibrary& lib, const PromptPlan& plan,
                          const std::string& context_text) {
    std::string out = lib.component("role");
    out += "\n\n";
    out += lib.component(std::string("type_") + test_type_name(plan.test_type));
    out += "\n\n";
    if (plan.objective)
        out += lib.component(std::string("subtype_") + subtype_name(plan.subtype));
    else
        out += lib.component(
            std::string("archetype_") +
            kArchetypeNames[static_cast<std::size_t>(plan.archetype % 5)]);
    if (plan.diversity_focus) {
        out += "\n\n";
        out += replace_all(
            replace_all(lib.component("diversity"), "{s}",
                        std::to_string(plan.sim_failures)),
            "{style}",
            kArchetypeNames[static_cast<std::size_t>(plan.archetype % 5)]);
    }
    out += "\n\n";
    out += replace_all(lib.component("context_wrapper"), "{context}", context_text);
    out += "\n\n";
    out += lib.component("format");
    return out;
}

}  // namespace ragbench
