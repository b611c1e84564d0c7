#include "ustrack/tools/cli.hpp"

int main(int argc, char** argv) { return ustrack::tools::run(argc, argv); }
