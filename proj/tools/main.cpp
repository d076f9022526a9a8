#include "skewsurge/cli.hpp"

int main(int argc, char** argv) { return skewsurge::run_cli(argc, argv); }
