#include "lapbox/cli.hpp"

int main(int argc, char** argv) { return lapbox::run_main(argc, argv); }
