#include "commands.hpp"

int main(int argc, char** argv) { return smoothgreed::cli::run_cli(argc, argv); }
