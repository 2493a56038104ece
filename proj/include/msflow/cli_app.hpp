#pragma once

namespace msflow::cli {

// Entry point for the msflow command line (run / verify / diagnose).
int run_cli(int argc, char** argv);

}  // namespace msflow::cli
