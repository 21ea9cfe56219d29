#include "onepulse/cli.hpp"

int main(int argc, char** argv) { return onepulse::cli::run(argc, argv); }
