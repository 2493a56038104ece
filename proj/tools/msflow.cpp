#include "msflow/cli_app.hpp"

int main(int argc, char** argv) { return msflow::cli::run_cli(argc, argv); }
