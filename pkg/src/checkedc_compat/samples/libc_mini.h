#ifndef LIBC_MINI_H
#define LIBC_MINI_H
typedef struct netif netif_t;
size_t fread(void *p, size_t size, size_t nmemb, FILE *stream);
size_t fwrite(const void *p, size_t size, size_t nmemb, FILE *stream);
int fclose(FILE *stream);
int fflush(FILE *stream);
int fgetc(FILE *stream);
int fputs(const char *s, FILE *stream);
void *memset(void *dst, int c, size_t n);
void *memcpy(void *dst, const void *src, size_t n);
int memcmp(const void *a, const void *b, size_t n);
size_t strlen(const char *s);
char *strncpy(char *dst, const char *src, size_t n);
int snprintf_lite(char *buf, size_t len, int value);
ssize_t read(int fd, void *buf, size_t count);
ssize_t write(int fd, const void *buf, size_t count);
int sum(int *xs, size_t n);
uint16_t inet_csum(uint16_t sum, const uint8_t *buf, uint16_t len);
int netif_get_addr(netif_t *iface, uint8_t *addr, uint32_t len);
void qsort_lite(void *base, size_t nmemb, size_t size);
int f(void);
int atoi(const char *s);
#endif
