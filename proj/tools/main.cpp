#include "commands.hpp"

int main(int argc, char** argv) { return rangewalk::cli::run_cli(argc, argv); }
