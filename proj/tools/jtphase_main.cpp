#include "jtphase/cli/app.hpp"

int main(int argc, char** argv) { return jtphase::cli::run(argc, argv); }
