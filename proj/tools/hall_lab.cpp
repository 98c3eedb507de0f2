#include "hall_lab/runner.hpp"

int main(int argc, char** argv) { return hall::cli_main(argc, argv); }
