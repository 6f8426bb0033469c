#include <iostream>

int main(int, char**) {
    std::cout << "acceptance suite placeholder\n";
    return 1;
}
