// Regenerates the shipped fixtures: make_fixtures <output-root>
#include <iostream>

#include "fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-root>\n";
    return 2;
  }
  try {
    irdecide::fixtures::write_all(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << "make_fixtures: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
