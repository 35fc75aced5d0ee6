#include "lda/cli/commands.hpp"

int main(int argc, char** argv) { return lda::cli::run(argc, argv); }
