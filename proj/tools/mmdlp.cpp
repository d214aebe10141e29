#include "mmdlp/cli.hpp"

int main(int argc, char** argv) { return mmdlp::cli::run_main(argc, argv); }
