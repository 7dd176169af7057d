#pragma once

#include "mcqforge/augmentor.hpp"
#include "mcqforge/config.hpp"
#include "mcqforge/country.hpp"
#include "mcqforge/error.hpp"
#include "mcqforge/evaluator.hpp"
#include "mcqforge/gateway.hpp"
#include "mcqforge/json_extract.hpp"
#include "mcqforge/jsonl.hpp"
#include "mcqforge/model.hpp"
#include "mcqforge/prompt_kit.hpp"
#include "mcqforge/splitter.hpp"
