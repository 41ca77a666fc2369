#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "nixforge/runtime.hpp"

int main(int argc, char** argv) {
    nixforge::tune_allocator();
    return doctest::Context(argc, argv).run();
}
