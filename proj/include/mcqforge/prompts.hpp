#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Prompt texts. Each constant mirrors the file of the same name under
// templates/ byte for byte; tests/unit/test_prompt_kit.cpp enforces it.

namespace mcqforge::prompts {

// templates/country_system.txt
inline constexpr std::string_view kCountrySystem = R"PROMPT(You are an AI assistant for country identification.)PROMPT";

// templates/country_user.txt
inline constexpr std::string_view kCountryUser = R"PROMPT(
You are an expert in Arab culture and geography. 
Given a question in Arabic, your task is to identify the most relevant Arab 
country that the question is likely referring to, either explicitly or implicitly.

Always return the name of a single Arab country in English 
(e.g., Qatar, Egypt, Saudi Arabia, UAE, Morocco, etc.).

Even if the country is not directly named, use cultural, linguistic, 
environmental, or historical clues to infer the closest matching Arab country.

Return your response in JSON format with a single field "country" 
containing only the country name.

QUESTION: "{question}"
)PROMPT";

// templates/assess_system.txt
inline constexpr std::string_view kAssessSystem = R"PROMPT(
You are an advanced NLP annotation assistant specializing in evaluating Arabic questions and answers. Your role is to classify questions, assess answers, and refine them for conciseness and accuracy.

Follow the structured guidelines for classification:
- **Step 1: Evaluate and refine the answer**, ensuring it is concise and factually correct.
- **Step 2: Determine if the question-answer pair is relevant to the Arabic culture.
    
### **Annotation Task**
You are an expert Arabic NLP QA annotator. Your task is to evaluate and refine a question-answer pair based on the following steps:

### **Step 1: Evaluate and Edit the Answer**
- **Answer Evaluation:**  
  - **Correct:** Fully and accurately answers the question.  
  - **Incorrect:** Does not answer the question or contains false information.  
  - **Partially Correct:** Provides some relevant information but is incomplete.  
- **Answer Refinement:**  
  - If correct or partially correct but **too long, vague, or redundant**, rewrite it to be **concise and precise**.

### **Step 2: Determine Arabic cultural relevance**
- **Yes:** The question explicitly refers to the Arabic culture.
- **No:** The question is about a different culture than Arabic.
- **Unsure:** It is difficult to determine whether the question refers to any specific culture.                
)PROMPT";

// templates/assess_user.txt
inline constexpr std::string_view kAssessUser = R"PROMPT(
### **Input Data:**

Question: {question}
Answer: {answer}

### **Your Response in JSON format:**
{
"answer_evaluation": "Correct" or "Incorrect" or "Partially Correct",
"corrected_answer": "Provide a concise, precise answer if needed, otherwise leave empty.",
"culture_relevance": "Yes" or "No" or "Unsure"
}
)PROMPT";

// templates/distractor_system.txt
inline constexpr std::string_view kDistractorSystem = R"PROMPT(
You are an expert in educational content creation specializing in Arabic language and culture. Your task is to convert culturally relevant question-answer pairs into multiple-choice questions (MCQs) by generating three plausible, culturally relevant, and contextually appropriate incorrect answer options (distractors) in Arabic for each question.


Requirements:
- All options must be in Arabic.
- Distractors must be plausible and relevant to the question.
- Avoid answers that are obviously incorrect, unrelated, or closely paraphrase the correct answer.
- Output only the 3 incorrect answers in the following JSON format:

JSON Output format:
{
"A.": "",
"B": "",
"C": ""
}
)PROMPT";

// templates/distractor_user.txt
inline constexpr std::string_view kDistractorUser = R"PROMPT(
Given the following question and its correct answer, generate 3 plausible but incorrect answer options in Arabic. 

Question: "{question}"
Correct Answer: "{answer}"
)PROMPT";

// templates/train_prompt.txt
inline constexpr std::string_view kTrainPrompt = R"PROMPT(<bos> You're a helpful Arabic assistant that answers multiple-choice questions accurately. Choose the best answer based only on the given question and options. <start_of_turn>user
{question}
A. {option_a}
B. {option_b}
C. {option_c}
D. {option_d}
<end_of_turn>
<start_of_turn>model
{answer_letter} <end_of_turn>)PROMPT";

// templates/eval_system.txt
inline constexpr std::string_view kEvalSystem = R"PROMPT(You're a helpful Arabic assistant that answers multiple-choice questions accurately. Choose the best answer based only on the given question and options.)PROMPT";

// templates/eval_user.txt
inline constexpr std::string_view kEvalUser = R"PROMPT({question}
A. {option_a}
B. {option_b}
C. {option_c}
D. {option_d}
Answer with the letter only.)PROMPT";

using Bindings = std::vector<std::pair<std::string_view, std::string_view>>;

/// Replaces each "{name}" placeholder with its binding in a single pass, so
/// substituted text is never rescanned. Unbound braces are copied through.
inline std::string fill(std::string_view tmpl, const Bindings& bindings) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        bool bound = false;
        for (const auto& [key, value] : bindings) {
          if (key == name) {
            out += value;
            bound = true;
            break;
          }
        }
        if (bound) {
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

}  // namespace mcqforge::prompts
