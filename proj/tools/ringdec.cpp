#include "ringdec/cli.hpp"

int main(int argc, char** argv) { return ringdec::cli::run(argc, argv); }
