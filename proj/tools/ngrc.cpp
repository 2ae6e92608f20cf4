#include "ngrc/experiment.hpp"

int main(int argc, char** argv) { return ngrc::cli::run(argc, argv); }
