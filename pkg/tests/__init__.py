# IoT Macroprogramming Toolchain Test Suite
