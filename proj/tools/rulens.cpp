#include "rulens/cli.hpp"

int main(int argc, char** argv) { return rulens::cli::run(argc, argv); }
