// Admin token lives in this module variable for the lifetime of the page.
// Deliberately no localStorage / sessionStorage / cookies: closing the tab
// forgets the token.

let adminToken: string | null = null;

export function setToken(token: string): void {
  adminToken = token.trim() === "" ? null : token.trim();
}

export function getToken(): string | null {
  return adminToken;
}

export function clearToken(): void {
  adminToken = null;
}
