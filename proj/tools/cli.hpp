#pragma once

#include <iosfwd>

namespace llmroi::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kEngine = 2, kIo = 3 };

/// Runs one `llm-roi` invocation. Results go to `out` (or --out), one-line
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Worker count from LLM_ROI_THREADS, else the hardware concurrency.
unsigned worker_count();

}  // namespace llmroi::cli
