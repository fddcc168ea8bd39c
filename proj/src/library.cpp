#include "metaprompt/library.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace metaprompt::prompts {

namespace {

using ordered_json = nlohmann::ordered_json;

// Splits a raw text block into one custom section of literal lines.
MetaPromptTemplate literal_template(std::string id, const std::string& block,
                                    RenderFormat format, bool trailing_delimiter) {
    MetaPromptTemplate tpl;
    tpl.id = std::move(id);
    tpl.default_format = format;
    tpl.trailing_delimiter = trailing_delimiter;
    TemplateSection section;
    std::string line;
    std::istringstream in(block);
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    if (!block.empty() && block.back() == '\n') {
        // getline drops the final empty line; the split above is enough
    }
    for (auto& l : lines) section.lines.push_back({std::move(l), "", ""});
    tpl.sections.push_back(std::move(section));
    return tpl;
}

// Declares a slot and marks every line carrying its bracketed marker.
void attach_slot(MetaPromptTemplate& tpl, const std::string& name,
                 const std::string& description) {
    tpl.slots[name] = description;
    const std::string marker = "[" + description + "]";
    bool found = false;
    for (auto& section : tpl.sections) {
        for (auto& line : section.lines) {
            if (line.text.find(marker) != std::string::npos) {
                line.slot = name;
                found = true;
            }
        }
    }
    if (!found) throw Error("template \"" + tpl.id + "\": marker " + marker + " not found");
}

MetaPromptTemplate make_math_markdown() {
    MetaPromptTemplate tpl;
    tpl.id = "math-markdown";
    tpl.default_format = RenderFormat::markdown;
    tpl.trailing_delimiter = true;

    TemplateSection problem;
    problem.role = SectionRole::problem_statement;
    problem.heading = "Problem Statement";
    problem.style = ListStyle::bullet;
    problem.lines.push_back({"[question to be answered]", "Problem", "question"});
    tpl.sections.push_back(std::move(problem));

    TemplateSection structure;
    structure.role = SectionRole::solution_structure;
    structure.heading = "Solution Structure";
    structure.style = ListStyle::numbered;
    structure.lines.push_back({"Begin the response with \"Let's think step by step.\"", "", ""});
    structure.lines.push_back(
        {"Follow with the reasoning steps, ensuring the solution process is broken down "
         "clearly and logically.",
         "", ""});
    structure.lines.push_back(
        {"End the solution with the final answer encapsulated in a LaTeX-formatted box, "
         "$\\boxed{...}$, for clarity and emphasis.",
         "", ""});
    structure.lines.push_back(
        {"Finally, state \"The answer is [final answer to the problem].\", with the final "
         "answer presented in LaTeX notation.",
         "", ""});
    tpl.sections.push_back(std::move(structure));

    tpl.slots["question"] = "question to be answered";
    return tpl;
}

MetaPromptTemplate make_math_json() {
    MetaPromptTemplate tpl;
    tpl.id = "math-json";
    tpl.title =
        "Integrate step-by-step reasoning to solve mathematical problems under following "
        "structure:";
    tpl.default_format = RenderFormat::json;
    tpl.trailing_delimiter = true;

    TemplateSection problem;
    problem.role = SectionRole::problem_statement;
    problem.heading = "Problem";
    problem.lines.push_back({"[question to be answered]", "", "question"});
    tpl.sections.push_back(std::move(problem));

    TemplateSection solution;
    solution.role = SectionRole::solution_structure;
    solution.heading = "Solution";
    solution.lines.push_back(
        {"Begin the response with \"Let's think step by step.\"", "Step 1", ""});
    solution.lines.push_back(
        {"Follow with the reasoning steps, ensuring the solution process is broken down "
         "clearly and logically.",
         "Step 2", ""});
    solution.lines.push_back(
        {"End the solution with the final answer encapsulated in a LaTeX-formatted box, "
         "$\\boxed{...}$, for clarity and emphasis.",
         "Step 3", ""});
    tpl.sections.push_back(std::move(solution));

    TemplateSection answer;
    answer.role = SectionRole::final_solution;
    answer.heading = "Final Answer";
    answer.lines.push_back({"[final answer to the problem]", "", ""});
    tpl.sections.push_back(std::move(answer));

    tpl.slots["question"] = "question to be answered";
    return tpl;
}

MetaPromptTemplate make_quadratic() {
    MetaPromptTemplate tpl;
    tpl.id = "quadratic";
    tpl.title =
        "A structure meta prompt for solving quadratic equations in the form $ax^2 + bx + c "
        "= 0$:";
    tpl.default_format = RenderFormat::json;
    tpl.trailing_delimiter = true;

    TemplateSection problem;
    problem.role = SectionRole::problem_statement;
    problem.heading = "Problem";
    // no bracketed marker here: the whole line is the question slot's default
    problem.lines.push_back(
        {"Solve the quadratic equation $ax^2 + bx + c = 0$ for $x$.", "", "question"});
    tpl.sections.push_back(std::move(problem));

    TemplateSection solution;
    solution.role = SectionRole::solution_structure;
    solution.heading = "Solution";
    const char* steps[] = {
        "Identify the coefficients $a$, $b$, and $c$ from the equation.",
        "Compute the discriminant using $\\Delta = b^2 - 4ac$.",
        "Check if $\\Delta > 0$, $\\Delta = 0$, or $\\Delta < 0$ to determine the nature of "
        "the roots.",
        "If $\\Delta > 0$, calculate the two distinct real roots using $x_{1,2} = \\frac{-b "
        "\\pm \\sqrt{\\Delta}}{2a}$.",
        "If $\\Delta = 0$, calculate the single real root using $x = \\frac{-b}{2a}$.",
        "If $\\Delta < 0$, calculate the complex roots using $x_{1,2} = \\frac{-b \\pm "
        "i\\sqrt{|\\Delta|}}{2a}$.",
        "End the solution process by summarizing the roots of the equation.",
    };
    for (std::size_t i = 0; i < std::size(steps); ++i) {
        solution.lines.push_back({steps[i], "Step " + std::to_string(i + 1), ""});
    }
    tpl.sections.push_back(std::move(solution));

    TemplateSection answer;
    answer.role = SectionRole::final_solution;
    answer.heading = "Final Answer";
    answer.lines.push_back(
        {"Depending on the discriminant $\\Delta$, the final answer will be the roots of the "
         "equation, given by $x_{1,2}$.",
         "", ""});
    tpl.sections.push_back(std::move(answer));

    tpl.slots["question"] = "question to be answered";
    return tpl;
}

MetaPromptTemplate make_system_generic() {
    const std::string block = R"__("""

You are ChatGPT, a highly advanced large language model with specialized expertise in mathematics. Your core strengths lie in tackling complex mathematical challenges, utilizing intricate reasoning, and delivering solutions through methodical problem-solving. Throughout this interaction, you will encounter a variety of mathematical problems, ranging from basic arithmetic to advanced calculus and beyond.

Your primary objective is to dissect and address each problem with a rigorous and detailed approach. This involves:

1. Clearly identifying and understanding the problem statement.
2. Breaking down the problem into manageable components, if necessary.
3. Applying relevant mathematical principles and techniques to solve each component.
4. Synthesizing the components' solutions to formulate a comprehensive answer.
5. Providing a clear, step-by-step explanation of your methodology, ensuring that your reasoning is thorough, precise, and easily understandable.

Your proficiency in mathematics is expected to guide users through the problem-solving process, offering insights, strategies, and explanations that illuminate the path to the solution.

""")__";
    return literal_template("system-generic", block, RenderFormat::markdown, false);
}

MetaPromptTemplate make_mp_cr_markdown() {
    const std::string block = R"__(<syntax>

## Problem: [problem]

Solution: Let's think step by step. [somewords interpreting the origin problem]

### Preliminary Contents

- **Prelim 1**: [preliminary contents 1]

- **Prelim 2**: [preliminary contents 2]

- [...]

### Hints
- **Hint 1**: [useful hints 1]

- **Hint 2**: [useful hints 2]

- [...]

### Intermediate Steps: Question-AnswerSketch-Code-Output-Answer Pairs

Let's think step by step.

#### Question 1: [the first question you raised]
- **Answer Sketch**: [write a sketch of your answer to question 1]

##### Code for Question 1
[call code interpreter here to verify and solve your answer sketch to question 1]

#### Answer for Question 1
- **Answer**: [your answer to this question 1 based on the results
given by code interpreter (if presented)]

#### Question 2: [the second question you raised]
- **Answer Sketch**: [write a sketch of your answer to question 2]

##### Code for Question 2
[call code interpreter here to verify and solve your answer sketch to question 2]

#### Answer for Question 2
- **Answer**: [your answer to this question 2 based on the results
given by code interpreter (if presented)]

#### Question 3: [the third question you raised]
- **Answer Sketch**: [write a sketch of your answer to question 3]

##### Code for Question 3
[call code interpreter here to verify and solve your answer sketch to question 3]

#### Answer for Question 3
- **Answer**: [your answer to this question 3 based on the results
given by code interpreter (if presented)]


### [Question ...]

### Final Solution:

Recall the origin problem <MathP> [origin problem] </MathP>.

Let's think step by step.

#### Solution Sketch
[write a sketch for your final solution]

#### Code for Final Solution
[call code interpreter here to verify and solve your final solution]

#### Final Answer
[present the final answer in latex boxed format, e.g., $\boxed{63\pi}$]
Final Answer: the answer is $\boxed{...}$.

</syntax>)__";
    auto tpl = literal_template("mp-cr-markdown", block, RenderFormat::markdown, false);
    attach_slot(tpl, "question", "problem");
    return tpl;
}

MetaPromptTemplate make_mp_cr_xml() {
    MetaPromptTemplate tpl;
    tpl.id = "mp-cr-xml";
    tpl.default_format = RenderFormat::xml;

    const std::string system_block = R"__(<description>
As one of the most distinguished mathematicians, logicians, programmers, and AI
scientists, you possess an unparalleled mastery over various mathematical domains.
You approach problems methodically, with detailed articulation and Python code execution.
</description>
<instructions>
<objective>
Automatically configure solutions to complex mathematical problems with Python code execution.
</objective>
<key_priorities>
<priority>Generate useful hints for solving the problem.</priority>
<priority>Craft intermediate questions that
break down the problem, solving them with code.</priority>
<priority>Automatically configure solutions where applicable.</priority>
</key_priorities>
<code_execution_guidelines>
<guideline>Import necessary libraries in all code blocks.</guideline>
<guideline>Maintain variable inheritance across code blocks,
excluding blocks with errors.</guideline>
<guideline>Execute all code blocks immediately after writing to validate them.
</guideline>
</code_execution_guidelines>
<mathematical_formatting>
<format>Present the final answer in LaTeX format, enclosed within '\boxed{}'
without units.</format>
<format>Use 'pi' and 'Rational' from Sympy for pi and fractions,
simplifying them without converting them to decimals.</format>
</mathematical_formatting>
</instructions>)__";

    const std::string syntax_block = R"__(<problem_structure>
<problem_definition>
<!-- Insert Problem Here -->
</problem_definition>
<solution_approach>
<!-- Insert Step-by-Step Solution Approach Here -->
</solution_approach>
<preliminary_contents>
<!-- Insert Preliminary Contents Here -->
</preliminary_contents>
<hints>
<!-- Insert Useful Hints Here -->
</hints>
<intermediate_steps>
<!-- Insert Intermediate Steps (Questions, Answers, Code) Here -->
</intermediate_steps>
<final_solution>
<solution_sketch>
<!-- Insert Solution Sketch Here -->
</solution_sketch>
<code_for_solution>
<!-- Insert Code for Final Solution Here -->
</code_for_solution>
<final_answer>
<!-- Insert Final Answer Here -->
</final_answer>
</final_solution>
</problem_structure>)__";

    auto block_section = [](const std::string& heading, SectionRole role,
                            const std::string& block) {
        TemplateSection section;
        section.heading = heading;
        section.role = role;
        std::istringstream in(block);
        std::string line;
        while (std::getline(in, line)) section.lines.push_back({line, "", ""});
        return section;
    };
    tpl.sections.push_back(block_section("system", SectionRole::system_instructions, system_block));
    tpl.sections.push_back(block_section("syntax", SectionRole::custom, syntax_block));
    return tpl;
}

MetaPromptTemplate make_mp_pt_revise() {
    const std::string block = R"__(**Task:** *Prompt Revision to Enhance Reasoning Capabilities.*

1. **Input Prompt:** [input prompt]
2. **Objective:** Revise the above input prompt to enhance critical thinking and reasoning capabilities.
3. **Key Elements for Revision:**
   - Integrate complex problem-solving elements.
   - Embed multi-step reasoning processes.
   - Incorporate scenarios challenging conventional thinking.
4. **Expected Outcome:**
   - The revised prompt ([revised prompt]) should stimulate deeper analytical thought.
   - It should facilitate a comprehensive understanding of the subject matter.
   - Ensure the revised prompt fosters the exploration of diverse perspectives.
   - The prompt should encourage synthesis of information from various domains.)__";
    auto tpl = literal_template("mp-pt-revise", block, RenderFormat::markdown, false);
    attach_slot(tpl, "input_prompt", "input prompt");
    return tpl;
}

MetaPromptTemplate make_mp_pt_simplify() {
    const std::string block = R"__(**Task:** *Prompt Simplification*

1. **Original Prompt:** [input prompt]
2. **Goal:** Transform the original prompt into a more concise version while preserving its core essence and objective.
3. **Instructions for Transformation:**
   1. Maintain the primary purpose and objectives of the original prompt.
   2. Focus on distilling the prompt to include only key instructions and essential information.
   3. Eliminate any extraneous or non-essential details.
   4. Use clear, direct language to ensure ease of understanding.
   5. Where beneficial, employ bullet points or numbered steps to structure the prompt and enhance clarity.
4. **Outcome:** The [revised prompt] should be succinct yet sufficiently detailed to guide effective task completion. It should be structured for ease of comprehension and application, ensuring a focused and streamlined approach to the task at hand.)__";
    auto tpl = literal_template("mp-pt-simplify", block, RenderFormat::markdown, false);
    attach_slot(tpl, "input_prompt", "input prompt");
    return tpl;
}

MetaPromptTemplate make_mp_pt_icpd() {
    const std::string block = R"__(**Task:** *Meta Prompting for In-Context Prompt Design*

1. **Document Analysis:**
   - Input: [Complex document, e.g., research paper, or even including this prompt itself]
   - Action: Analyze and comprehend key concepts, methodologies, challenges, and objectives.
2. **Task Interpretation:**
   - Action: Synthesize information to define the core problem or task.
   - Considerations: Identify constraints, goals, or requirements.
3. **Prompt Design:**
   - Objective: Develop a structured prompt for problem-solving.
   - Elements: Instructions, step-by-step approach, background information.
4. **Optional - Direct Solution Proposal:**
   - Objective: Propose initial steps or a complete solution strategy.
   - Considerations: Feasibility and practicality within the context.
5. **Output Prompt: [to be generated using the same latex format as this prompt]**

*Note: The output is a coherent, actionable prompt or solution strategy, tailored to the specifics of the input document.*)__";
    auto tpl = literal_template("mp-pt-icpd", block, RenderFormat::markdown, false);
    attach_slot(tpl, "input_prompt",
                "Complex document, e.g., research paper, or even including this prompt itself");
    return tpl;
}

const std::map<std::string, MetaPromptTemplate>& library() {
    static const std::map<std::string, MetaPromptTemplate> kLibrary = [] {
        std::map<std::string, MetaPromptTemplate> lib;
        for (auto make : {make_math_markdown, make_math_json, make_quadratic,
                          make_system_generic, make_mp_cr_markdown, make_mp_cr_xml,
                          make_mp_pt_revise, make_mp_pt_simplify, make_mp_pt_icpd}) {
            MetaPromptTemplate tpl = make();
            validate(tpl);
            lib.emplace(tpl.id, std::move(tpl));
        }
        return lib;
    }();
    return kLibrary;
}

}  // namespace

const std::vector<std::string>& builtin_ids() {
    static const std::vector<std::string> kIds = {
        "math-markdown", "math-json",      "quadratic",
        "system-generic", "mp-cr-markdown", "mp-cr-xml",
        "mp-pt-revise",   "mp-pt-simplify", "mp-pt-icpd",
    };
    return kIds;
}

MetaPromptTemplate builtin(const std::string& id) {
    const auto& lib = library();
    auto it = lib.find(id);
    if (it == lib.end()) throw UnknownTemplate(id);
    return it->second;
}

std::string template_to_manifest(const MetaPromptTemplate& tpl) {
    ordered_json j;
    j["id"] = tpl.id;
    j["title"] = tpl.title;
    j["default_format"] = to_string(tpl.default_format);
    j["trailing_delimiter"] = tpl.trailing_delimiter;
    j["slots"] = ordered_json::object();
    for (const auto& [name, desc] : tpl.slots) j["slots"][name] = desc;
    j["sections"] = ordered_json::array();
    for (const auto& section : tpl.sections) {
        ordered_json js;
        js["role"] = to_string(section.role);
        js["heading"] = section.heading;
        js["style"] = to_string(section.style);
        js["lines"] = ordered_json::array();
        for (const auto& line : section.lines) {
            ordered_json jl;
            jl["text"] = line.text;
            jl["label"] = line.label;
            jl["slot"] = line.slot;
            js["lines"].push_back(std::move(jl));
        }
        j["sections"].push_back(std::move(js));
    }
    return j.dump(2) + "\n";
}

MetaPromptTemplate template_from_manifest(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, std::string("bad template manifest: ") + e.what());
    }
    MetaPromptTemplate tpl;
    tpl.id = j.at("id").get<std::string>();
    tpl.title = j.at("title").get<std::string>();
    tpl.default_format = format_from_string(j.at("default_format").get<std::string>());
    tpl.trailing_delimiter = j.at("trailing_delimiter").get<bool>();
    for (const auto& [name, desc] : j.at("slots").items()) {
        tpl.slots[name] = desc.get<std::string>();
    }
    for (const auto& js : j.at("sections")) {
        TemplateSection section;
        section.role = role_from_string(js.at("role").get<std::string>());
        section.heading = js.at("heading").get<std::string>();
        section.style = style_from_string(js.at("style").get<std::string>());
        for (const auto& jl : js.at("lines")) {
            section.lines.push_back({jl.at("text").get<std::string>(),
                                     jl.at("label").get<std::string>(),
                                     jl.at("slot").get<std::string>()});
        }
        tpl.sections.push_back(std::move(section));
    }
    validate(tpl);
    return tpl;
}

MetaPromptTemplate load_template_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open template file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return template_from_manifest(buffer.str());
}

void save_template_file(const MetaPromptTemplate& tpl, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write template file: " + path.string());
    out << template_to_manifest(tpl);
}

}  // namespace metaprompt::prompts
