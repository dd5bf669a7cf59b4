#include "mno/cli/commands.hpp"

int main(int argc, char** argv) { return mno::cli::run(argc, argv); }
